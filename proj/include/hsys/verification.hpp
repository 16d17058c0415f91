#pragma once

// Post-hoc checks of a computed critical point against the properties that
// hold for exact critical points: the H-system, the boundary conditions,
// orthogonality and balance of the gradients, zero means, the Hopf
// differential tau / z^2 with real tau, and the conformality defect.

#include "hsys/minimizer.hpp"

#include <complex>

namespace hsys {

/// Nodal map u = (u1, u2, u3) : annulus -> R^3.
struct MapTriple {
  ScalarField u1, u2, u3;
};

/// u = (lambda a, lambda b, lambda^2 phi).
MapTriple lift_map(const FieldPair& p, const EnergyEval& e);

struct HopfFit {
  /// Least-squares constant c in z^2 <d_z u, d_z u> ~ c over interior nodes.
  std::complex<double> tau;
  /// Weighted L2 misfit divided by the L2 norm of z^2 <d_z u, d_z u> (0 if both vanish).
  double fit_residual = 0.0;
  /// |Im tau| / (|tau| + eps).
  double imag_fraction = 0.0;
};

HopfFit hopf_fit(const MapTriple& u);
HopfFit hopf_fit(const Solution& sol);

/// L2 norms of |u_x|^2 - |u_y|^2 and 2 <u_x, u_y>. These are Re and -Im of
/// 4 <d_z u, d_z u>, so combined == 4 * hopf_l2 up to round-off.
struct ConformalDefect {
  double real_part = 0.0;
  double imag_part = 0.0;
  /// sqrt(real_part^2 + imag_part^2).
  double combined = 0.0;
  /// combined / L2 norm of |u_x|^2 + |u_y|^2 (0 for a constant map).
  double normalized = 0.0;
  /// L2 norm of <d_z u, d_z u>.
  double hopf_l2 = 0.0;
};

ConformalDefect conformal_defect(const MapTriple& u);
ConformalDefect conformal_defect(const Solution& sol);

/// Accuracy of the discrete operators on this grid, measured on manufactured
/// fields with known derivatives, and the resolution of a given pair.
struct SchemeError {
  /// Relative max errors of laplacian, bracket and solve_dirichlet on smooth
  /// manufactured data.
  double laplacian = 0.0;
  double bracket = 0.0;
  double poisson = 0.0;
  /// Largest relative coefficient among the top radial Legendre modes and the
  /// top sixth of the angular band, over a and b.
  double spectral_tail = 0.0;

  double value() const;
};

/// Manufactured-solution part only (spectral_tail = 0).
SchemeError manufactured_scheme_error(const GridPtr& grid);
SchemeError scheme_error(const FieldPair& p);

struct Tolerances {
  double scheme_error = 0.0;
  double el_factor = 10.0;
  double boundary_factor = 10.0;
  double balance = 1e-6;
  double mean = 1e-9;
  double hopf_residual = 1e-3;
  double imag_fraction = 1e-3;
  double hopf_relation = 1e-10;
  double lambda_bookkeeping = 1e-12;

  double el() const { return el_factor * scheme_error; }
  double boundary() const { return boundary_factor * scheme_error; }

  /// Defaults with scheme_error = scheme_error(p).value().
  static Tolerances for_pair(const FieldPair& p);
};

struct CertificateChecks {
  bool el_residual = false;
  bool bc_phi = false;
  bool bc_neumann = false;
  bool grad_orthogonality = false;
  bool norm_balance = false;
  bool means = false;
  bool hopf_residual = false;
  bool hopf_real = false;
  bool hopf_relation = false;
  bool lambda_bookkeeping = false;

  bool all() const;
};

/// Residuals are relative unless noted.
///
/// el_residual_interior is the interior max of |Lap u + u_x ^ u_y| over the max
/// of |Lap u|. With -Lap phi = {a, b} and the Euler-Lagrange system
/// -Lap a = lambda^2 {b, phi}, -Lap b = lambda^2 {phi, a}, the map
/// (lambda a, lambda b, lambda^2 phi) satisfies Lap u = -u_x ^ u_y for either
/// sign of lambda; (lambda a, lambda b, -lambda^2 phi) then solves
/// Lap u = u_x ^ u_y. h_system_literal is the residual of Lap u = u_x ^ u_y
/// for (lambda a, lambda b, lambda^2 phi) itself and is ~2 away from a
/// critical point.
struct CertificateReport {
  double energy = 0.0;
  double lambda = 0.0;
  double el_residual_interior = 0.0;
  double h_system_literal = 0.0;
  /// max |phi| on both circles over max |phi|.
  double bc_phi = 0.0;
  /// max |da/dn| on both circles over max |grad a|; same for b.
  double bc_neumann_a = 0.0;
  double bc_neumann_b = 0.0;
  /// |int grad a . grad b| / (|grad a| + |grad b|)^2.
  double grad_orthogonality = 0.0;
  /// | |grad a| - |grad b| | / (|grad a| + |grad b|)^2.
  double norm_balance = 0.0;
  /// int a / area, int b / area.
  double mean_a = 0.0;
  double mean_b = 0.0;
  bool means_apply = false;
  HopfFit hopf;
  ConformalDefect conformal;
  /// |conformal.combined - 4 hopf_l2| / (1 + conformal.combined).
  double hopf_relation = 0.0;
  /// Largest relative gap among E, lambda^2 |grad phi| and -lambda sqrt(N / 2).
  double lambda_bookkeeping = 0.0;
  SchemeError scheme;
  Tolerances tolerances;
  CertificateChecks checks;
  bool passed = false;
};

/// The mean check applies for m >= 2 only (mode 0 is not in F_1).
CertificateReport certify(const FieldPair& p, const EnergyEval& e, SymmetryOrder m,
                          const Tolerances& tol);
CertificateReport certify(const FieldPair& p, const EnergyEval& e, SymmetryOrder m);
CertificateReport certify(const Solution& sol, const Tolerances& tol);
CertificateReport certify(const Solution& sol);

}  // namespace hsys
