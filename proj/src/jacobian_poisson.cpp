#include "hsys/jacobian_poisson.hpp"

#include "hsys/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hsys {

ScalarField bracket(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  const AnnulusGrid& g = a.grid();
  const Eigen::MatrixXd ar = g.radial_derivative(a.values());
  const Eigen::MatrixXd at = g.theta_derivative(a.values());
  const Eigen::MatrixXd br = g.radial_derivative(b.values());
  const Eigen::MatrixXd bt = g.theta_derivative(b.values());
  Eigen::MatrixXd j = (ar.cwiseProduct(bt) - at.cwiseProduct(br)).cwiseQuotient(g.radius());
  return ScalarField(a.grid_ptr(), std::move(j));
}

ScalarField solve_dirichlet(const ScalarField& f) {
  return ScalarField(f.grid_ptr(),
                     f.grid().solve_modes(ModeOperator::dirichlet_laplacian, f.values()));
}

WenteReport wente_report(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  WenteReport rep;
  rep.grad_norm_a = std::sqrt(dirichlet_inner(a, a));
  rep.grad_norm_b = std::sqrt(dirichlet_inner(b, b));
  if (is_numerically_constant(a) || is_numerically_constant(b))
    throw InvalidArgument("wente_report needs non-constant a and b");
  const ScalarField phi = solve_dirichlet(bracket(a, b));
  rep.sup_norm_phi = phi.max_abs();
  rep.grad_norm_phi = std::sqrt(dirichlet_inner(phi, phi));
  rep.ratio = (rep.sup_norm_phi + rep.grad_norm_phi) / (rep.grad_norm_a * rep.grad_norm_b);
  return rep;
}

double lemma2_identity_residual(const ScalarField& a, const ScalarField& b,
                                const ScalarField& phi, double boundary_tol) {
  require_same_grid(a, b);
  require_same_grid(a, phi);
  const AnnulusGrid& g = a.grid();
  const double scale = std::max(1.0, a.max_abs() * phi.max_abs());
  for (const auto& ring : g.boundary()) {
    const double trace =
        a.values().row(ring.radial_index).cwiseProduct(phi.values().row(ring.radial_index))
            .cwiseAbs()
            .maxCoeff();
    if (trace > boundary_tol * scale)
      throw InvalidArgument("lemma2_identity_residual: phi*a does not vanish on the boundary");
  }
  const double lhs = integrate(phi.times(bracket(a, b)));
  const double rhs = integrate(a.times(bracket(b, phi)));
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

}  // namespace hsys
