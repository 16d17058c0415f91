#include "hsys/energy.hpp"

#include "hsys/errors.hpp"
#include "hsys/jacobian_poisson.hpp"

#include <algorithm>
#include <cmath>

namespace hsys {

EnergyEval evaluate(const FieldPair& p) {
  const AnnulusGrid& g = p.grid();
  const Eigen::MatrixXd& w = g.quad_weights();
  const Eigen::MatrixXd& r = g.radius();
  const Eigen::MatrixXd ar = g.radial_derivative(p.a.values());
  const Eigen::MatrixXd at = g.theta_derivative(p.a.values()).cwiseQuotient(r);
  const Eigen::MatrixXd br = g.radial_derivative(p.b.values());
  const Eigen::MatrixXd bt = g.theta_derivative(p.b.values()).cwiseQuotient(r);
  const double na = w.cwiseProduct(ar.cwiseAbs2() + at.cwiseAbs2()).sum();
  const double nb = w.cwiseProduct(br.cwiseAbs2() + bt.cwiseAbs2()).sum();
  const double num = na + nb;
  // Same round-off threshold as is_numerically_constant().
  if (!(std::sqrt(num) > 1e-10 * std::max(p.a.max_abs(), p.b.max_abs())))
    throw DegeneratePair("a and b are both constant");
  // Same expression as bracket(); the source is cut to the dealiasing band.
  const Eigen::MatrixXd jac = ar.cwiseProduct(bt) - at.cwiseProduct(br);
  ScalarField phi(p.grid_ptr(),
                  g.solve_modes(ModeOperator::dirichlet_laplacian, jac, g.band_limit()));
  const double phi_sq = dirichlet_inner(phi, phi);
  // |grad phi| <= C |grad a| |grad b| <= C num / 2, so compare on that scale.
  if (!(phi_sq > 0.0) || std::sqrt(phi_sq) <= 1e-14 * num)
    throw DegeneratePair("phi vanishes identically: {a, b} carries no Jacobian");
  EnergyEval e{0.0, na, nb, std::sqrt(phi_sq), 0.0, std::move(phi)};
  e.value = num / (2.0 * e.grad_phi_norm);
  e.lambda = -std::sqrt(num / (2.0 * phi_sq));
  return e;
}

double first_variation(const FieldPair& p, const FieldPair& dir) {
  return first_variation(p, evaluate(p), dir);
}

double first_variation(const FieldPair& p, const EnergyEval& e, const FieldPair& dir) {
  const double num = e.grad_a_sq + e.grad_b_sq;
  const double stretch = dirichlet_inner(p.a, dir.a) + dirichlet_inner(p.b, dir.b);
  const ScalarField dj = bracket(dir.a, p.b) + bracket(p.a, dir.b);
  const double twist = integrate(e.phi.times(dj));
  return e.value * (2.0 * stretch / num - twist / (e.grad_phi_norm * e.grad_phi_norm));
}

FieldPair euler_lagrange_strong(const FieldPair& p, const EnergyEval& e) {
  const double l2 = e.lambda_squared();
  Eigen::MatrixXd ra = (-laplacian(p.a) - l2 * bracket(p.b, e.phi)).values();
  Eigen::MatrixXd rb = (-laplacian(p.b) - l2 * bracket(e.phi, p.a)).values();
  const int last = p.grid().n_r() - 1;
  ra.row(0).setZero();
  ra.row(last).setZero();
  rb.row(0).setZero();
  rb.row(last).setZero();
  return FieldPair(ScalarField(p.grid_ptr(), std::move(ra)),
                   ScalarField(p.grid_ptr(), std::move(rb)));
}

FieldPair energy_covector(const FieldPair& p, const EnergyEval& e) {
  const AnnulusGrid& g = p.grid();
  const Eigen::MatrixXd& w = g.quad_weights();
  const Eigen::MatrixXd& r = g.radius();
  const Eigen::MatrixXd w_ang = w.cwiseQuotient(r.cwiseAbs2());

  const Eigen::MatrixXd ar = g.radial_derivative(p.a.values());
  const Eigen::MatrixXd at = g.theta_derivative(p.a.values());
  const Eigen::MatrixXd br = g.radial_derivative(p.b.values());
  const Eigen::MatrixXd bt = g.theta_derivative(p.b.values());

  // Stiffness K f = Dr^T (W Dr f) + Dt^T (W/r^2 Dt f), with Dt^T = -Dt.
  auto stiffness = [&](const Eigen::MatrixXd& fr, const Eigen::MatrixXd& ft) -> Eigen::MatrixXd {
    return g.radial_derivative_transpose(w.cwiseProduct(fr)) -
           g.theta_derivative(w_ang.cwiseProduct(ft));
  };
  const Eigen::MatrixXd chi_r = w.cwiseProduct(e.phi.values()).cwiseQuotient(r);
  // Adjoints of alpha -> int phi {alpha, b} and beta -> int phi {a, beta}.
  const Eigen::MatrixXd twist_a = g.radial_derivative_transpose(chi_r.cwiseProduct(bt)) +
                                  g.theta_derivative(chi_r.cwiseProduct(br));
  const Eigen::MatrixXd twist_b = -g.theta_derivative(chi_r.cwiseProduct(ar)) -
                                  g.radial_derivative_transpose(chi_r.cwiseProduct(at));

  const double num = e.grad_a_sq + e.grad_b_sq;
  const double c_stretch = 2.0 * e.value / num;
  const double c_twist = e.value / (e.grad_phi_norm * e.grad_phi_norm);
  Eigen::MatrixXd ga = c_stretch * stiffness(ar, at) - c_twist * twist_a;
  Eigen::MatrixXd gb = c_stretch * stiffness(br, bt) - c_twist * twist_b;
  return FieldPair(ScalarField(p.grid_ptr(), std::move(ga)),
                   ScalarField(p.grid_ptr(), std::move(gb)));
}

double h1_inner(const FieldPair& p, const FieldPair& q) {
  return dirichlet_inner(p.a, q.a) + dirichlet_inner(p.b, q.b) + l2_inner(p, q);
}

FieldPair sobolev_gradient(const FieldPair& p, SymmetryOrder m) {
  return sobolev_gradient(p, evaluate(p), m);
}

FieldPair sobolev_gradient(const FieldPair& p, const EnergyEval& e, SymmetryOrder m) {
  const FieldPair cov = energy_covector(p, e);
  const AnnulusGrid& g = p.grid();
  FieldPair raw(ScalarField(p.grid_ptr(), g.solve_modes(ModeOperator::neumann_h1, cov.a.values())),
                ScalarField(p.grid_ptr(), g.solve_modes(ModeOperator::neumann_h1, cov.b.values())));
  return project_fm(raw, m);
}

}  // namespace hsys
