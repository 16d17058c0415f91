#pragma once

#include <stdexcept>
#include <string>

namespace hsys {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad grid spec, odd n_theta,
/// m not dividing n_theta, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

/// The pair has no Jacobian content: phi vanishes identically and E is
/// undefined.
class DegeneratePair : public Error {
 public:
  using Error::Error;
};

/// A value that must stay finite became NaN or Inf.
class NonFinite : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition of the doubling construction failed.
class SeamGap : public Error {
 public:
  SeamGap(const std::string& what, double gap) : Error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

}  // namespace hsys
