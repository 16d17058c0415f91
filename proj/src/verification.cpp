#include "hsys/verification.hpp"

#include "hsys/jacobian_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hsys {

namespace {

using Cplx = std::complex<double>;

struct CartesianDerivs {
  Eigen::MatrixXd x, y;
};

CartesianDerivs cartesian(const ScalarField& f) {
  const VectorField g = gradient(f);
  return {g.cartesian_x(), g.cartesian_y()};
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Interior rows only: the boundary circles are excluded.
Eigen::MatrixXd interior_weights(const AnnulusGrid& g) {
  Eigen::MatrixXd w = g.quad_weights();
  w.row(0).setZero();
  w.row(g.n_r() - 1).setZero();
  return w;
}

// h = sum_i (d_z u_i)^2, d_z = (d_x - i d_y) / 2.
Eigen::MatrixXcd hopf_density(const MapTriple& u) {
  const AnnulusGrid& g = u.u1.grid();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(g.n_r(), g.n_theta());
  for (const ScalarField* f : {&u.u1, &u.u2, &u.u3}) {
    const CartesianDerivs d = cartesian(*f);
    Eigen::MatrixXcd dz(g.n_r(), g.n_theta());
    dz.real() = 0.5 * d.x;
    dz.imag() = -0.5 * d.y;
    h += dz.cwiseProduct(dz);
  }
  return h;
}

Eigen::MatrixXd node_norm(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                          const Eigen::MatrixXd& c3) {
  return (c1.cwiseAbs2() + c2.cwiseAbs2() + c3.cwiseAbs2()).cwiseSqrt();
}

double interior_max(const AnnulusGrid& g, const Eigen::MatrixXd& v) {
  return v.middleRows(1, g.n_r() - 2).cwiseAbs().maxCoeff();
}

double boundary_max(const AnnulusGrid& g, const Eigen::MatrixXd& v) {
  return std::max(v.row(0).cwiseAbs().maxCoeff(), v.row(g.n_r() - 1).cwiseAbs().maxCoeff());
}

double tail_fraction(const AnnulusGrid& g, const ScalarField& a, const ScalarField& b) {
  double tail = 0.0;
  for (const ScalarField* f : {&a, &b}) {
    const Eigen::MatrixXd c = g.radial_legendre_coefficients(f->values()).cwiseAbs();
    const double head = c.maxCoeff();
    if (head > 0.0) tail = std::max(tail, c.bottomRows(4).maxCoeff() / head);
  }
  // Angular content near the band edge, on w = a + i b.
  Eigen::MatrixXcd w(g.n_r(), g.n_theta());
  w.real() = a.values();
  w.imag() = b.values();
  const Eigen::MatrixXd spec = g.forward_theta(w).cwiseAbs();
  const double head = spec.maxCoeff();
  const int band = g.band_limit();
  const int edge = band - std::max(1, band / 6);
  double top = 0.0;
  for (int j = 0; j < g.n_theta(); ++j) {
    const int k = std::abs(g.wavenumber(j));
    if (k > edge) top = std::max(top, spec.col(j).maxCoeff());
  }
  if (head > 0.0) tail = std::max(tail, top / head);
  return tail;
}

}  // namespace

MapTriple lift_map(const FieldPair& p, const EnergyEval& e) {
  const double l = e.lambda;
  return MapTriple{l * p.a, l * p.b, (l * l) * e.phi};
}

HopfFit hopf_fit(const MapTriple& u) {
  const AnnulusGrid& g = u.u1.grid();
  const Eigen::MatrixXcd h = hopf_density(u);
  Eigen::MatrixXcd z(g.n_r(), g.n_theta());
  z.real() = g.x();
  z.imag() = g.y();
  const Eigen::MatrixXcd q = z.cwiseProduct(z).cwiseProduct(h);
  const Eigen::MatrixXd w = interior_weights(g);

  HopfFit fit;
  if (is_numerically_constant(u.u1) && is_numerically_constant(u.u2) && is_numerically_constant(u.u3))
    return fit;
  // Weighted least squares for a single constant: the weighted mean.
  fit.tau = (w.cast<Cplx>().cwiseProduct(q)).sum() / w.sum();
  const double misfit = (w.cwiseProduct((q.array() - fit.tau).matrix().cwiseAbs2())).sum();
  const double size = (w.cwiseProduct(q.cwiseAbs2())).sum();
  fit.fit_residual = std::sqrt(safe_ratio(misfit, size));
  const double mag = std::abs(fit.tau);
  fit.imag_fraction = std::abs(fit.tau.imag()) / (mag + 1e-300);
  return fit;
}

HopfFit hopf_fit(const Solution& sol) { return hopf_fit(lift_map(sol.pair, sol.eval)); }

ConformalDefect conformal_defect(const MapTriple& u) {
  const AnnulusGrid& g = u.u1.grid();
  const int nr = g.n_r();
  const int nt = g.n_theta();
  Eigen::MatrixXd xx = Eigen::MatrixXd::Zero(nr, nt);
  Eigen::MatrixXd yy = Eigen::MatrixXd::Zero(nr, nt);
  Eigen::MatrixXd xy = Eigen::MatrixXd::Zero(nr, nt);
  for (const ScalarField* f : {&u.u1, &u.u2, &u.u3}) {
    const CartesianDerivs d = cartesian(*f);
    xx += d.x.cwiseAbs2();
    yy += d.y.cwiseAbs2();
    xy += d.x.cwiseProduct(d.y);
  }
  const Eigen::MatrixXd& w = g.quad_weights();
  auto l2 = [&](const Eigen::MatrixXd& v) { return std::sqrt(w.cwiseProduct(v.cwiseAbs2()).sum()); };
  ConformalDefect d;
  d.real_part = l2(xx - yy);
  d.imag_part = l2(2.0 * xy);
  d.combined = std::hypot(d.real_part, d.imag_part);
  d.normalized = safe_ratio(d.combined, l2(xx + yy));
  d.hopf_l2 = l2(hopf_density(u).cwiseAbs());
  return d;
}

ConformalDefect conformal_defect(const Solution& sol) {
  return conformal_defect(lift_map(sol.pair, sol.eval));
}

double SchemeError::value() const {
  return std::max({laplacian, bracket, poisson, spectral_tail});
}

SchemeError manufactured_scheme_error(const GridPtr& grid) {
  const AnnulusGrid& g = *grid;
  SchemeError s;

  // Laplacian of e^x cos y + x^2 y is 2y; scale by the size of the second
  // derivatives being summed.
  const ScalarField f = ScalarField::from_cartesian(
      grid, [](double x, double y) { return std::exp(x) * std::cos(y) + x * x * y; });
  const ScalarField lap = ScalarField::from_cartesian(grid, [](double, double y) { return 2.0 * y; });
  const ScalarField second = ScalarField::from_cartesian(grid, [](double x, double y) {
    return 2.0 * std::abs(std::exp(x) * std::cos(y)) + 2.0 * std::abs(y) + 4.0 * std::abs(x);
  });
  s.laplacian = (laplacian(f) - lap).max_abs() / second.max_abs();

  const ScalarField a = ScalarField::from_cartesian(grid, [](double x, double y) { return std::sin(x) * y; });
  const ScalarField b = ScalarField::from_cartesian(grid, [](double x, double y) { return x * std::exp(y); });
  const ScalarField jac = ScalarField::from_cartesian(grid, [](double x, double y) {
    return std::cos(x) * y * x * std::exp(y) - std::sin(x) * std::exp(y);
  });
  const ScalarField jac_scale = ScalarField::from_cartesian(grid, [](double x, double y) {
    return std::abs(std::cos(x) * y * x * std::exp(y)) + std::abs(std::sin(x) * std::exp(y));
  });
  s.bracket = (bracket(a, b) - jac).max_abs() / jac_scale.max_abs();

  // phi* = sin(pi t) e^r (1 + cos 3 theta), t = (r - r0) / (1 - r0).
  const double r0 = g.r0();
  const double len = 1.0 - r0;
  const double k = std::numbers::pi / len;
  const ScalarField phi = ScalarField::from_polar(grid, [&](double r, double th) {
    return std::sin(k * (r - r0)) * std::exp(r) * (1.0 + std::cos(3.0 * th));
  });
  const ScalarField src = ScalarField::from_polar(grid, [&](double r, double th) {
    const double sn = std::sin(k * (r - r0));
    const double cs = std::cos(k * (r - r0));
    const double e = std::exp(r);
    const double s0 = sn * e;
    const double s1 = (k * cs + sn) * e;
    const double s2 = (-k * k * sn + 2.0 * k * cs + sn) * e;
    return -((s2 + s1 / r) * (1.0 + std::cos(3.0 * th)) - 9.0 * s0 / (r * r) * std::cos(3.0 * th));
  });
  s.poisson = (solve_dirichlet(src) - phi).max_abs() / phi.max_abs();
  return s;
}

SchemeError scheme_error(const FieldPair& p) {
  SchemeError s = manufactured_scheme_error(p.grid_ptr());
  s.spectral_tail = tail_fraction(p.grid(), p.a, p.b);
  return s;
}

Tolerances Tolerances::for_pair(const FieldPair& p) {
  Tolerances t;
  t.scheme_error = hsys::scheme_error(p).value();
  return t;
}

bool CertificateChecks::all() const {
  return el_residual && bc_phi && bc_neumann && grad_orthogonality && norm_balance && means &&
         hopf_residual && hopf_real && hopf_relation && lambda_bookkeeping;
}

namespace {

CertificateReport certify_with(const FieldPair& p, const EnergyEval& e, SymmetryOrder m,
                               const Tolerances& tol, const SchemeError& scheme) {
  const AnnulusGrid& g = p.grid();
  CertificateReport rep;
  rep.energy = e.value;
  rep.lambda = e.lambda;
  rep.tolerances = tol;
  rep.scheme = scheme;

  const MapTriple u = lift_map(p, e);
  const Eigen::MatrixXd l1 = laplacian(u.u1).values();
  const Eigen::MatrixXd l2 = laplacian(u.u2).values();
  const Eigen::MatrixXd l3 = laplacian(u.u3).values();
  // u_x ^ u_y = ({u2, u3}, {u3, u1}, {u1, u2}).
  const Eigen::MatrixXd c1 = bracket(u.u2, u.u3).values();
  const Eigen::MatrixXd c2 = bracket(u.u3, u.u1).values();
  const Eigen::MatrixXd c3 = bracket(u.u1, u.u2).values();
  const double scale =
      std::max(interior_max(g, node_norm(l1, l2, l3)), interior_max(g, node_norm(c1, c2, c3)));
  rep.el_residual_interior = safe_ratio(interior_max(g, node_norm(l1 + c1, l2 + c2, l3 + c3)), scale);
  rep.h_system_literal = safe_ratio(interior_max(g, node_norm(l1 - c1, l2 - c2, l3 - c3)), scale);

  rep.bc_phi = safe_ratio(boundary_max(g, e.phi.values()), e.phi.max_abs());
  const VectorField ga = gradient(p.a);
  const VectorField gb = gradient(p.b);
  const double ga_max = ga.squared_norm().cwiseSqrt().maxCoeff();
  const double gb_max = gb.squared_norm().cwiseSqrt().maxCoeff();
  // Outward normal derivative is +-d_r on the circles; the sign does not
  // matter for a max of magnitudes.
  rep.bc_neumann_a = safe_ratio(boundary_max(g, ga.radial()), ga_max);
  rep.bc_neumann_b = safe_ratio(boundary_max(g, gb.radial()), gb_max);

  const double na = std::sqrt(e.grad_a_sq);
  const double nb = std::sqrt(e.grad_b_sq);
  const double sum_sq = (na + nb) * (na + nb);
  rep.grad_orthogonality = safe_ratio(std::abs(dirichlet_inner(p.a, p.b)), sum_sq);
  rep.norm_balance = safe_ratio(std::abs(na - nb), sum_sq);

  const double area = g.spec().area();
  rep.mean_a = integrate(p.a) / area;
  rep.mean_b = integrate(p.b) / area;
  rep.means_apply = m.value() >= 2;

  rep.hopf = hopf_fit(u);
  rep.conformal = conformal_defect(u);
  rep.hopf_relation =
      std::abs(rep.conformal.combined - 4.0 * rep.conformal.hopf_l2) / (1.0 + rep.conformal.combined);

  const double num = e.grad_a_sq + e.grad_b_sq;
  const double e1 = std::sqrt(dirichlet_inner(u.u3, u.u3));  // lambda^2 |grad phi|
  const double e2 = -e.lambda * std::sqrt(num / 2.0);
  rep.lambda_bookkeeping =
      std::max(std::abs(e1 - e.value), std::abs(e2 - e.value)) / std::abs(e.value);

  CertificateChecks& c = rep.checks;
  c.el_residual = rep.el_residual_interior <= tol.el();
  c.bc_phi = rep.bc_phi <= tol.boundary();
  c.bc_neumann = std::max(rep.bc_neumann_a, rep.bc_neumann_b) <= tol.boundary();
  c.grad_orthogonality = rep.grad_orthogonality <= tol.balance;
  c.norm_balance = rep.norm_balance <= tol.balance;
  c.means = !rep.means_apply || std::max(std::abs(rep.mean_a), std::abs(rep.mean_b)) <= tol.mean;
  c.hopf_residual = rep.hopf.fit_residual <= tol.hopf_residual;
  c.hopf_real = rep.hopf.imag_fraction <= tol.imag_fraction;
  c.hopf_relation = rep.hopf_relation <= tol.hopf_relation;
  c.lambda_bookkeeping = rep.lambda_bookkeeping <= tol.lambda_bookkeeping;
  rep.passed = c.all();
  return rep;
}

}  // namespace

CertificateReport certify(const FieldPair& p, const EnergyEval& e, SymmetryOrder m,
                          const Tolerances& tol) {
  return certify_with(p, e, m, tol, scheme_error(p));
}

CertificateReport certify(const FieldPair& p, const EnergyEval& e, SymmetryOrder m) {
  const SchemeError scheme = scheme_error(p);
  Tolerances tol;
  tol.scheme_error = scheme.value();
  return certify_with(p, e, m, tol, scheme);
}

CertificateReport certify(const Solution& sol, const Tolerances& tol) {
  return certify(sol.pair, sol.eval, sol.m, tol);
}

CertificateReport certify(const Solution& sol) { return certify(sol.pair, sol.eval, sol.m); }

}  // namespace hsys
