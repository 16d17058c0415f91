#pragma once

// The class F_m of pairs Theta = (a, b) with Theta o A = A o Theta, A the
// rotation by 2 pi / m acting on the domain and on the target plane at once.
//
// With w = a + i b and w(r, theta) = sum_k c_k(r) e^{ik theta}, the condition
// w(e^{i alpha} z) = e^{i alpha} w(z), alpha = 2 pi / m, keeps exactly the
// modes k = 1 (mod m). That characterization is checked numerically by
// equivariance_defect(), which tests the defining relation directly.

#include "hsys/annulus_grid.hpp"

#include <cstdint>

namespace hsys {

class SymmetryOrder {
 public:
  explicit SymmetryOrder(int m);
  int value() const { return m_; }
  double angle() const;
  /// Whether e^{ik theta} survives in w = a + i b.
  bool allows_mode(int k) const;
  /// Grid shift realizing A; throws InvalidArgument unless m divides n_theta.
  int grid_steps(const AnnulusGrid& grid) const;

 private:
  int m_;
};

struct FieldPair {
  ScalarField a;
  ScalarField b;

  FieldPair(ScalarField a_, ScalarField b_);
  const GridPtr& grid_ptr() const { return a.grid_ptr(); }
  const AnnulusGrid& grid() const { return a.grid(); }

  FieldPair& operator+=(const FieldPair& o);
  FieldPair& operator-=(const FieldPair& o);
  FieldPair& operator*=(double s);
  friend FieldPair operator+(FieldPair p, const FieldPair& q) { return p += q; }
  friend FieldPair operator-(FieldPair p, const FieldPair& q) { return p -= q; }
  friend FieldPair operator*(FieldPair p, double s) { return p *= s; }
  friend FieldPair operator*(double s, FieldPair p) { return p *= s; }
};

/// (a, b) = (x, y), the identity map of the annulus.
FieldPair identity_pair(const GridPtr& grid);

/// L2-orthogonal projection onto F_m (mode filter on w = a + i b). Idempotent.
FieldPair project_fm(const FieldPair& p, SymmetryOrder m);

/// max over nodes of |Theta(A x) - A Theta(x)|.
double equivariance_defect(const FieldPair& p, SymmetryOrder m);

/// Random element of F_m: allowed modes with smooth radial profiles
/// (cubic Legendre polynomials in r) and magnitudes ~ decay^|k|.
/// Deterministic in seed.
FieldPair random_equivariant(const GridPtr& grid, SymmetryOrder m, std::uint64_t seed,
                             double decay = 0.5);

/// Theta o A^steps (domain rotation only).
FieldPair rotate_domain(const FieldPair& p, int steps);
/// R(angle) Theta (target rotation only).
FieldPair rotate_target(const FieldPair& p, double angle);

double l2_inner(const FieldPair& p, const FieldPair& q);

}  // namespace hsys
