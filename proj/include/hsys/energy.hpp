#pragma once

#include "hsys/equivariance.hpp"

namespace hsys {

/// E(a, b) = (|grad a|^2 + |grad b|^2) / (2 |grad phi|), with phi the
/// Dirichlet solution of -Laplacian(phi) = {a, b}, together with the
/// quantities it is built from. The source {a, b} is truncated to the grid's
/// dealiasing band (|k| <= band_limit()); for pairs in F_m the product is
/// exact on that band.
struct EnergyEval {
  double value = 0.0;
  double grad_a_sq = 0.0;
  double grad_b_sq = 0.0;
  double grad_phi_norm = 0.0;
  /// -sqrt((grad_a_sq + grad_b_sq) / (2 grad_phi_norm^2)); u = (lambda a, lambda b, lambda^2 phi).
  double lambda = 0.0;
  ScalarField phi;

  double lambda_squared() const { return lambda * lambda; }
};

/// Throws DegeneratePair when a and b are both constant or phi vanishes.
EnergyEval evaluate(const FieldPair& p);

/// dE/dt at t = 0 along p + t dir:
///   E [ 2 (int grad a . grad alpha + grad b . grad beta) / (|grad a|^2 + |grad b|^2)
///       - int phi ({alpha, b} + {a, beta}) / |grad phi|^2 ].
/// On this grid the formula is the exact derivative of the discrete energy.
double first_variation(const FieldPair& p, const FieldPair& dir);
double first_variation(const FieldPair& p, const EnergyEval& e, const FieldPair& dir);

/// (-Laplacian a - lambda^2 {b, phi}, -Laplacian b - lambda^2 {phi, a}) on
/// interior nodes; boundary rows are zero.
FieldPair euler_lagrange_strong(const FieldPair& p, const EnergyEval& e);

/// Nodal covector of the discrete energy: first_variation(p, d) equals
/// sum_ij (G.a(i,j) d.a(i,j) + G.b(i,j) d.b(i,j)).
FieldPair energy_covector(const FieldPair& p, const EnergyEval& e);

/// int grad f . grad g + f g, summed over both components.
double h1_inner(const FieldPair& p, const FieldPair& q);

/// H1 Riesz representative of the first variation, restricted to F_m:
/// solves (K + W) g = covector per component (K the discrete Neumann
/// stiffness, W the mass) and projects onto F_m. first_variation(p, -g) <= 0.
FieldPair sobolev_gradient(const FieldPair& p, SymmetryOrder m);
FieldPair sobolev_gradient(const FieldPair& p, const EnergyEval& e, SymmetryOrder m);

}  // namespace hsys
