#pragma once

// Discretization of the annulus {r0 < r < 1}.
//
// Nodes form a polar tensor grid: Legendre-Gauss-Lobatto points in r (both
// boundary circles included) times uniform angles theta_j = 2 pi j / n_theta.
// Radial derivatives use LGL collocation, angular derivatives are Fourier
// (Nyquist mode dropped). With LGL weights the radial derivative satisfies
// summation by parts exactly, so
//
//   dirichlet_inner(f, g) = integrate(f * (-laplacian(g)))
//
// holds to round-off whenever f vanishes on both circles. The solvers and the
// energy gradient rely on that identity.
//
// Field storage is an n_r x n_theta matrix; column j holds the radial profile
// at angle theta_j.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <memory>

namespace hsys {

struct GridSpec {
  double r0 = 0.5;
  int n_r = 64;
  int n_theta = 128;

  /// Throws InvalidArgument unless 0 < r0 < 1, n_r >= 8, n_theta >= 8 and even.
  void validate() const;
  double area() const;
  bool operator==(const GridSpec&) const = default;
};

struct BoundaryRing {
  int radial_index;
  double radius;
  /// Outward normal is normal_sign * e_r: +1 on r = 1, -1 on r = r0.
  double normal_sign;
};

/// Linear operators that are diagonal in the angular wavenumber and solved
/// radially, one Cholesky factor per |k|.
enum class ModeOperator {
  /// -Laplacian on interior nodes, zero Dirichlet data on both circles.
  dirichlet_laplacian,
  /// Discrete H1 Gram matrix (K + W), natural (Neumann) boundary.
  neumann_h1,
};

class AnnulusGrid;
using GridPtr = std::shared_ptr<const AnnulusGrid>;

GridPtr build_grid(const GridSpec& spec);

class AnnulusGrid {
 public:
  explicit AnnulusGrid(const GridSpec& spec);
  ~AnnulusGrid();
  AnnulusGrid(const AnnulusGrid&) = delete;
  AnnulusGrid& operator=(const AnnulusGrid&) = delete;

  const GridSpec& spec() const { return spec_; }
  int n_r() const { return spec_.n_r; }
  int n_theta() const { return spec_.n_theta; }
  double r0() const { return spec_.r0; }
  double d_theta() const { return d_theta_; }

  const Eigen::VectorXd& r_nodes() const { return r_; }
  const Eigen::VectorXd& theta_nodes() const { return theta_; }
  /// Radial quadrature weights: int_{r0}^{1} g dr ~ sum_i w_i g(r_i).
  const Eigen::VectorXd& radial_weights() const { return w_r_; }
  /// Area weights w_i r_i dtheta; sum is pi (1 - r0^2).
  const Eigen::MatrixXd& quad_weights() const { return area_w_; }
  /// LGL collocation derivative in r (dense n_r x n_r).
  const Eigen::MatrixXd& radial_derivative_matrix() const { return d_r_; }
  /// LGL reference nodes in [-1, 1] matching r_nodes.
  const Eigen::VectorXd& reference_nodes() const { return xi_; }

  const Eigen::MatrixXd& radius() const { return r_mat_; }
  const Eigen::MatrixXd& cos_theta() const { return cos_mat_; }
  const Eigen::MatrixXd& sin_theta() const { return sin_mat_; }
  Eigen::MatrixXd x() const { return r_mat_.cwiseProduct(cos_mat_); }
  Eigen::MatrixXd y() const { return r_mat_.cwiseProduct(sin_mat_); }

  std::array<BoundaryRing, 2> boundary() const;

  /// Signed wavenumber of FFT column j: 0, 1, ..., n/2, -(n/2-1), ..., -1.
  int wavenumber(int j) const;
  /// Wavenumber seen by the angular derivative (Nyquist mapped to 0).
  int derivative_wavenumber(int j) const;
  /// Largest |k| kept by the dealiasing rule, floor((n_theta - 1) / 3).
  /// Products of two fields limited to this band are exact on the band.
  int band_limit() const { return (spec_.n_theta - 1) / 3; }
  /// Zeroes angular modes with |k| > band_limit().
  Eigen::MatrixXd truncate_band(const Eigen::MatrixXd& values) const;

  // Angular transforms along each row. Forward transforms are unnormalized.
  Eigen::MatrixXcd forward_theta(const Eigen::MatrixXcd& values) const;
  Eigen::MatrixXcd inverse_theta(const Eigen::MatrixXcd& spectrum) const;
  /// Half spectrum (n_theta/2 + 1 columns) of a real field.
  Eigen::MatrixXcd forward_theta_real(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd inverse_theta_real(const Eigen::MatrixXcd& half_spectrum) const;

  Eigen::MatrixXd theta_derivative(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd radial_derivative(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd radial_derivative_transpose(const Eigen::MatrixXd& values) const;

  /// Solves op * u = rhs mode by mode. For dirichlet_laplacian, rhs is the
  /// nodal source f and u vanishes on both circles. For neumann_h1, rhs is a
  /// nodal covector (already carrying quadrature weights). With max_mode >= 0
  /// the source is truncated to |k| <= max_mode first.
  Eigen::MatrixXd solve_modes(ModeOperator op, const Eigen::MatrixXd& rhs,
                              int max_mode = -1) const;

  /// Discrete Legendre coefficients of each radial column (n_r x n_theta).
  Eigen::MatrixXd radial_legendre_coefficients(const Eigen::MatrixXd& values) const;

 private:
  struct FftPlans;
  struct ModeFactors;

  const ModeFactors& factors(ModeOperator op) const;

  GridSpec spec_;
  double d_theta_ = 0.0;
  Eigen::VectorXd xi_, r_, theta_, w_r_;
  Eigen::MatrixXd area_w_, d_r_, r_mat_, cos_mat_, sin_mat_;
  std::unique_ptr<FftPlans> plans_;
  std::unique_ptr<ModeFactors> dirichlet_;
  std::unique_ptr<ModeFactors> neumann_;
};

/// Nodal values of a real function on a grid.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid);
  ScalarField(GridPtr grid, Eigen::MatrixXd values);

  static ScalarField from_cartesian(GridPtr grid,
                                    const std::function<double(double, double)>& f);
  static ScalarField from_polar(GridPtr grid,
                                const std::function<double(double, double)>& f);
  static ScalarField constant(GridPtr grid, double c);

  const AnnulusGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  ScalarField operator-() const { return *this * -1.0; }

  /// Pointwise product.
  ScalarField times(const ScalarField& o) const;
  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd values_;
};

/// Gradient-like field stored in the polar frame (e_r, e_theta).
class VectorField {
 public:
  VectorField(GridPtr grid, Eigen::MatrixXd radial, Eigen::MatrixXd angular);
  static VectorField from_cartesian(GridPtr grid, const Eigen::MatrixXd& vx,
                                    const Eigen::MatrixXd& vy);

  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::MatrixXd& radial() const { return radial_; }
  const Eigen::MatrixXd& angular() const { return angular_; }
  Eigen::MatrixXd cartesian_x() const;
  Eigen::MatrixXd cartesian_y() const;
  Eigen::MatrixXd squared_norm() const;

 private:
  GridPtr grid_;
  Eigen::MatrixXd radial_, angular_;
};

/// Per-radius angular Fourier coefficients, f(r_i, theta) = sum_k c(i,k) e^{ik theta}.
struct ThetaModes {
  GridPtr grid;
  Eigen::MatrixXcd coeffs;  // n_r x n_theta, FFT column order
};

void require_same_grid(const ScalarField& a, const ScalarField& b);
bool same_grid(const AnnulusGrid& a, const AnnulusGrid& b);

/// Polar components (d_r f, r^{-1} d_theta f).
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// divergence(gradient(f)).
ScalarField laplacian(const ScalarField& f);
double integrate(const ScalarField& f);
double dirichlet_inner(const ScalarField& f, const ScalarField& g);
double l2_inner(const ScalarField& f, const ScalarField& g);
ThetaModes theta_modes(const ScalarField& f);
ScalarField inverse_theta_modes(const ThetaModes& modes);
/// |grad f| at round-off level: sqrt(dirichlet_inner(f, f)) <= rel * max |f|.
/// Differentiating a constant on the grid leaves round-off, not zero.
bool is_numerically_constant(const ScalarField& f, double rel = 1e-10);
/// f o A^steps where A rotates the domain by 2 pi / n_theta.
ScalarField rotate(const ScalarField& f, int steps);

}  // namespace hsys
