#pragma once

#include "hsys/annulus_grid.hpp"

namespace hsys {

/// Empirical Wente quotient for one pair.
struct WenteReport {
  double sup_norm_phi = 0.0;
  double grad_norm_phi = 0.0;
  double grad_norm_a = 0.0;
  double grad_norm_b = 0.0;
  /// (sup_norm_phi + grad_norm_phi) / (grad_norm_a * grad_norm_b)
  double ratio = 0.0;
};

/// Jacobian {a,b} = a_x b_y - a_y b_x, evaluated as r^{-1}(a_r b_theta - a_theta b_r)
/// with the same derivative operators as gradient(). Exactly antisymmetric.
ScalarField bracket(const ScalarField& a, const ScalarField& b);

/// Solves -Laplacian(phi) = f on interior nodes with phi = 0 on both circles.
/// One Cholesky solve per angular wavenumber.
ScalarField solve_dirichlet(const ScalarField& f);

/// Solves the Dirichlet problem for f = {a,b} and reports the norms entering
/// the Wente estimate. The sup norm is the max over nodes.
WenteReport wente_report(const ScalarField& a, const ScalarField& b);

/// |int phi{a,b} - int a{b,phi}| / (1 + |int phi{a,b}|). Requires phi*a to
/// vanish on both circles (checked against boundary_tol, relative to the
/// field magnitudes).
double lemma2_identity_residual(const ScalarField& a, const ScalarField& b,
                                const ScalarField& phi, double boundary_tol = 1e-10);

}  // namespace hsys
