#include "hsys/equivariance.hpp"

#include "hsys/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

namespace hsys {

SymmetryOrder::SymmetryOrder(int m) : m_(m) {
  if (m < 1) throw InvalidArgument("symmetry order m must be >= 1");
}

double SymmetryOrder::angle() const { return 2.0 * std::numbers::pi / m_; }

bool SymmetryOrder::allows_mode(int k) const { return ((k - 1) % m_ + m_) % m_ == 0; }

int SymmetryOrder::grid_steps(const AnnulusGrid& grid) const {
  if (grid.n_theta() % m_ != 0)
    throw InvalidArgument("m = " + std::to_string(m_) + " does not divide n_theta = " +
                          std::to_string(grid.n_theta()));
  return grid.n_theta() / m_;
}

FieldPair::FieldPair(ScalarField a_, ScalarField b_) : a(std::move(a_)), b(std::move(b_)) {
  require_same_grid(a, b);
}

FieldPair& FieldPair::operator+=(const FieldPair& o) {
  a += o.a;
  b += o.b;
  return *this;
}

FieldPair& FieldPair::operator-=(const FieldPair& o) {
  a -= o.a;
  b -= o.b;
  return *this;
}

FieldPair& FieldPair::operator*=(double s) {
  a *= s;
  b *= s;
  return *this;
}

FieldPair identity_pair(const GridPtr& grid) {
  return FieldPair(ScalarField(grid, grid->x()), ScalarField(grid, grid->y()));
}

FieldPair project_fm(const FieldPair& p, SymmetryOrder m) {
  const AnnulusGrid& g = p.grid();
  m.grid_steps(g);
  Eigen::MatrixXcd w(g.n_r(), g.n_theta());
  w.real() = p.a.values();
  w.imag() = p.b.values();
  Eigen::MatrixXcd spec = g.forward_theta(w);
  const int band = g.band_limit();
  for (int j = 0; j < g.n_theta(); ++j) {
    const int k = g.wavenumber(j);
    if (!m.allows_mode(k) || std::abs(k) > band) spec.col(j).setZero();
  }
  const Eigen::MatrixXcd out = g.inverse_theta(spec);
  return FieldPair(ScalarField(p.grid_ptr(), out.real()), ScalarField(p.grid_ptr(), out.imag()));
}

double equivariance_defect(const FieldPair& p, SymmetryOrder m) {
  const AnnulusGrid& g = p.grid();
  const int s = m.grid_steps(g);
  const double c = std::cos(m.angle());
  const double sn = std::sin(m.angle());
  const int n = g.n_theta();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const int js = (j + s) % n;
    for (int i = 0; i < g.n_r(); ++i) {
      const double a = p.a(i, j);
      const double b = p.b(i, j);
      const double dx = p.a(i, js) - (c * a - sn * b);
      const double dy = p.b(i, js) - (sn * a + c * b);
      worst = std::max(worst, std::hypot(dx, dy));
    }
  }
  return worst;
}

FieldPair random_equivariant(const GridPtr& grid, SymmetryOrder m, std::uint64_t seed,
                             double decay) {
  if (!(decay > 0.0)) throw InvalidArgument("decay must be positive");
  const AnnulusGrid& g = *grid;
  m.grid_steps(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Radial basis: Legendre P_0..P_3 of the reference coordinate.
  const Eigen::VectorXd& xi = g.reference_nodes();
  Eigen::MatrixXd basis(g.n_r(), 4);
  basis.col(0).setOnes();
  basis.col(1) = xi;
  basis.col(2) = (3.0 * xi.array().square() - 1.0) / 2.0;
  basis.col(3) = (5.0 * xi.array().cube() - 3.0 * xi.array()) / 2.0;

  constexpr int kMaxShift = 4;
  Eigen::MatrixXcd spec = Eigen::MatrixXcd::Zero(g.n_r(), g.n_theta());
  const int n = g.n_theta();
  for (int shift = -kMaxShift; shift <= kMaxShift; ++shift) {
    const int k = 1 + shift * m.value();
    const bool usable = std::abs(k) <= g.band_limit();
    Eigen::VectorXcd profile = Eigen::VectorXcd::Zero(g.n_r());
    for (int q = 0; q < 4; ++q) {
      const std::complex<double> z(normal(rng), normal(rng));
      profile += basis.col(q).cast<std::complex<double>>() * (z / (q + 1.0));
    }
    if (!usable) continue;
    const int col = k >= 0 ? k : k + n;
    spec.col(col) = profile * (std::pow(decay, std::abs(k)) * n);
  }
  const Eigen::MatrixXcd w = g.inverse_theta(spec);
  return FieldPair(ScalarField(grid, w.real()), ScalarField(grid, w.imag()));
}

FieldPair rotate_domain(const FieldPair& p, int steps) {
  return FieldPair(rotate(p.a, steps), rotate(p.b, steps));
}

FieldPair rotate_target(const FieldPair& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return FieldPair(c * p.a - s * p.b, s * p.a + c * p.b);
}

double l2_inner(const FieldPair& p, const FieldPair& q) {
  return l2_inner(p.a, q.a) + l2_inner(p.b, q.b);
}

}  // namespace hsys
