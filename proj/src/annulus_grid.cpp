#include "hsys/annulus_grid.hpp"

#include "hsys/errors.hpp"
#include "hsys/parallel.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

namespace hsys {

namespace {

// The FFTW planner is not re-entrant; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct LglRule {
  Eigen::VectorXd nodes, weights;
  Eigen::MatrixXd diff;
  Eigen::MatrixXd legendre;  // legendre(i, p) = P_p(x_i)
};

// Legendre-Gauss-Lobatto nodes on [-1, 1] (ascending), weights and the
// collocation derivative matrix for n points.
LglRule lgl_rule(int n) {
  const int deg = n - 1;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = -std::cos(std::numbers::pi * i / deg);

  Eigen::MatrixXd p(n, n);
  for (int iter = 0; iter < 200; ++iter) {
    p.col(0).setOnes();
    p.col(1) = x;
    for (int k = 2; k < n; ++k)
      p.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(p.col(k - 1)) - (k - 1.0) * p.col(k - 2)) / k;
    const Eigen::VectorXd step =
        (x.cwiseProduct(p.col(deg)) - p.col(deg - 1)).cwiseQuotient(n * p.col(deg));
    x -= step;
    if (step.cwiseAbs().maxCoeff() < 1e-16) break;
  }
  p.col(0).setOnes();
  p.col(1) = x;
  for (int k = 2; k < n; ++k)
    p.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(p.col(k - 1)) - (k - 1.0) * p.col(k - 2)) / k;
  // Endpoints are exact.
  x[0] = -1.0;
  x[n - 1] = 1.0;

  LglRule rule;
  rule.nodes = x;
  rule.legendre = p;
  rule.weights = (2.0 / (deg * n)) * p.col(deg).cwiseAbs2().cwiseInverse();

  const Eigen::VectorXd pn = p.col(deg);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = pn[i] / (pn[j] * (x[i] - x[j]));
      row += d(i, j);
    }
    // Negative-sum trick: rows annihilate constants exactly.
    d(i, i) = -row;
  }
  rule.diff = d;
  return rule;
}

}  // namespace

void GridSpec::validate() const {
  if (!(r0 > 0.0 && r0 < 1.0))
    throw InvalidArgument("r0 must lie in (0, 1), got " + std::to_string(r0));
  if (n_r < 8) throw InvalidArgument("n_r must be at least 8");
  if (n_theta < 8) throw InvalidArgument("n_theta must be at least 8");
  if (n_theta % 2 != 0) throw InvalidArgument("n_theta must be even");
}

double GridSpec::area() const { return std::numbers::pi * (1.0 - r0 * r0); }

struct AnnulusGrid::FftPlans {
  fftw_plan c2c_forward = nullptr;
  fftw_plan c2c_backward = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  FftPlans(int n_r, int n_theta) {
    std::lock_guard lock(planner_mutex());
    const int n[] = {n_theta};
    auto* cin = fftw_alloc_complex(static_cast<std::size_t>(n_r) * n_theta);
    auto* cout = fftw_alloc_complex(static_cast<std::size_t>(n_r) * n_theta);
    auto* rin = fftw_alloc_real(static_cast<std::size_t>(n_r) * n_theta);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    // Row transforms of a column-major n_r x n_theta array: stride n_r,
    // consecutive transforms one element apart.
    c2c_forward = fftw_plan_many_dft(1, n, n_r, cin, nullptr, n_r, 1, cout, nullptr, n_r, 1,
                                     FFTW_FORWARD, flags);
    c2c_backward = fftw_plan_many_dft(1, n, n_r, cin, nullptr, n_r, 1, cout, nullptr, n_r, 1,
                                      FFTW_BACKWARD, flags);
    r2c = fftw_plan_many_dft_r2c(1, n, n_r, rin, nullptr, n_r, 1, cout, nullptr, n_r, 1, flags);
    c2r = fftw_plan_many_dft_c2r(1, n, n_r, cin, nullptr, n_r, 1, rin, nullptr, n_r, 1, flags);
    fftw_free(cin);
    fftw_free(cout);
    fftw_free(rin);
  }

  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(c2c_forward);
    fftw_destroy_plan(c2c_backward);
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
};

struct AnnulusGrid::ModeFactors {
  std::once_flag once;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> by_k;  // index |k| = 0..n_theta/2
};

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const AnnulusGrid>(spec); }

AnnulusGrid::AnnulusGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const int nr = spec_.n_r;
  const int nt = spec_.n_theta;
  const double half_len = 0.5 * (1.0 - spec_.r0);

  const LglRule rule = lgl_rule(nr);
  xi_ = rule.nodes;
  r_ = (xi_.array() + 1.0) * half_len + spec_.r0;
  r_[0] = spec_.r0;
  r_[nr - 1] = 1.0;
  w_r_ = rule.weights * half_len;
  d_r_ = rule.diff / half_len;

  d_theta_ = 2.0 * std::numbers::pi / nt;
  theta_.resize(nt);
  for (int j = 0; j < nt; ++j) theta_[j] = d_theta_ * j;

  r_mat_ = r_.replicate(1, nt);
  cos_mat_.resize(nr, nt);
  sin_mat_.resize(nr, nt);
  for (int j = 0; j < nt; ++j) {
    cos_mat_.col(j).setConstant(std::cos(theta_[j]));
    sin_mat_.col(j).setConstant(std::sin(theta_[j]));
  }
  area_w_ = (w_r_.cwiseProduct(r_) * d_theta_).replicate(1, nt);

  plans_ = std::make_unique<FftPlans>(nr, nt);
  dirichlet_ = std::make_unique<ModeFactors>();
  neumann_ = std::make_unique<ModeFactors>();
}

AnnulusGrid::~AnnulusGrid() = default;

std::array<BoundaryRing, 2> AnnulusGrid::boundary() const {
  return {BoundaryRing{0, spec_.r0, -1.0}, BoundaryRing{spec_.n_r - 1, 1.0, 1.0}};
}

int AnnulusGrid::wavenumber(int j) const {
  const int n = spec_.n_theta;
  return j <= n / 2 ? j : j - n;
}

int AnnulusGrid::derivative_wavenumber(int j) const {
  const int n = spec_.n_theta;
  if (j == n / 2) return 0;
  return wavenumber(j);
}

Eigen::MatrixXd AnnulusGrid::truncate_band(const Eigen::MatrixXd& values) const {
  Eigen::MatrixXcd spec = forward_theta_real(values);
  for (int j = band_limit() + 1; j < spec.cols(); ++j) spec.col(j).setZero();
  return inverse_theta_real(spec);
}

Eigen::MatrixXcd AnnulusGrid::forward_theta(const Eigen::MatrixXcd& values) const {
  Eigen::MatrixXcd in = values;
  Eigen::MatrixXcd out(spec_.n_r, spec_.n_theta);
  fftw_execute_dft(plans_->c2c_forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::MatrixXcd AnnulusGrid::inverse_theta(const Eigen::MatrixXcd& spectrum) const {
  Eigen::MatrixXcd in = spectrum;
  Eigen::MatrixXcd out(spec_.n_r, spec_.n_theta);
  fftw_execute_dft(plans_->c2c_backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out / static_cast<double>(spec_.n_theta);
}

Eigen::MatrixXcd AnnulusGrid::forward_theta_real(const Eigen::MatrixXd& values) const {
  Eigen::MatrixXd in = values;
  Eigen::MatrixXcd out(spec_.n_r, spec_.n_theta / 2 + 1);
  fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::MatrixXd AnnulusGrid::inverse_theta_real(const Eigen::MatrixXcd& half_spectrum) const {
  Eigen::MatrixXcd in = half_spectrum;  // c2r overwrites its input
  Eigen::MatrixXd out(spec_.n_r, spec_.n_theta);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out / static_cast<double>(spec_.n_theta);
}

Eigen::MatrixXd AnnulusGrid::theta_derivative(const Eigen::MatrixXd& values) const {
  Eigen::MatrixXcd spec = forward_theta_real(values);
  for (int j = 0; j < spec.cols(); ++j)
    spec.col(j) *= std::complex<double>(0.0, derivative_wavenumber(j));
  return inverse_theta_real(spec);
}

Eigen::MatrixXd AnnulusGrid::radial_derivative(const Eigen::MatrixXd& values) const {
  return d_r_ * values;
}

Eigen::MatrixXd AnnulusGrid::radial_derivative_transpose(const Eigen::MatrixXd& values) const {
  return d_r_.transpose() * values;
}

const AnnulusGrid::ModeFactors& AnnulusGrid::factors(ModeOperator op) const {
  ModeFactors& f = op == ModeOperator::dirichlet_laplacian ? *dirichlet_ : *neumann_;
  std::call_once(f.once, [&] {
    const int nr = spec_.n_r;
    const int kmax = spec_.n_theta / 2;
    // Radial stiffness D^T diag(w r) D; angular stiffness k^2 diag(w / r).
    const Eigen::MatrixXd stiff = d_r_.transpose() * w_r_.cwiseProduct(r_).asDiagonal() * d_r_;
    const Eigen::VectorXd ang = w_r_.cwiseQuotient(r_);
    const Eigen::VectorXd mass = w_r_.cwiseProduct(r_);
    f.by_k.resize(kmax + 1);
    std::atomic<bool> failed{false};
    parallel_for(kmax + 1, [&](std::size_t kk) {
      const int k = static_cast<int>(kk) == kmax ? 0 : static_cast<int>(kk);
      Eigen::MatrixXd a = stiff;
      a.diagonal() += static_cast<double>(k) * k * ang;
      if (op == ModeOperator::dirichlet_laplacian) {
        f.by_k[kk].compute(a.block(1, 1, nr - 2, nr - 2));
      } else {
        a.diagonal() += mass;
        f.by_k[kk].compute(a * d_theta_);
      }
      if (f.by_k[kk].info() != Eigen::Success) failed = true;
    });
    // SPD by construction; failure means a broken grid.
    if (failed) throw Error("radial mode factorization failed");
  });
  return f;
}

Eigen::MatrixXd AnnulusGrid::solve_modes(ModeOperator op, const Eigen::MatrixXd& rhs,
                                         int max_mode) const {
  const ModeFactors& f = factors(op);
  const int nr = spec_.n_r;
  Eigen::MatrixXcd spec = forward_theta_real(rhs);
  if (max_mode >= 0)
    for (int j = max_mode + 1; j < spec.cols(); ++j) spec.col(j).setZero();
  const Eigen::VectorXd load = w_r_.cwiseProduct(r_);
  parallel_for(static_cast<std::size_t>(spec.cols()), [&](std::size_t j) {
    const auto& llt = f.by_k[j];
    if (op == ModeOperator::dirichlet_laplacian) {
      Eigen::MatrixXd b(nr - 2, 2);
      b.col(0) = spec.col(j).segment(1, nr - 2).real().cwiseProduct(load.segment(1, nr - 2));
      b.col(1) = spec.col(j).segment(1, nr - 2).imag().cwiseProduct(load.segment(1, nr - 2));
      const Eigen::MatrixXd u = llt.solve(b);
      spec(0, j) = 0.0;
      spec(nr - 1, j) = 0.0;
      for (int i = 0; i < nr - 2; ++i) spec(i + 1, j) = {u(i, 0), u(i, 1)};
    } else {
      Eigen::MatrixXd b(nr, 2);
      b.col(0) = spec.col(j).real();
      b.col(1) = spec.col(j).imag();
      const Eigen::MatrixXd u = llt.solve(b);
      for (int i = 0; i < nr; ++i) spec(i, j) = {u(i, 0), u(i, 1)};
    }
  });
  return inverse_theta_real(spec);
}

Eigen::MatrixXd AnnulusGrid::radial_legendre_coefficients(const Eigen::MatrixXd& values) const {
  const int n = spec_.n_r;
  const int deg = n - 1;
  // Rebuild P_p(x_i) from the stored reference nodes.
  Eigen::MatrixXd p(n, n);
  p.col(0).setOnes();
  p.col(1) = xi_;
  for (int k = 2; k < n; ++k)
    p.col(k) = ((2.0 * k - 1.0) * xi_.cwiseProduct(p.col(k - 1)) - (k - 1.0) * p.col(k - 2)) / k;
  const Eigen::VectorXd w = w_r_ / (0.5 * (1.0 - spec_.r0));
  Eigen::VectorXd inv_gamma(n);
  for (int k = 0; k < deg; ++k) inv_gamma[k] = (2.0 * k + 1.0) / 2.0;
  inv_gamma[deg] = deg / 2.0;  // discrete norm of the top mode on LGL points
  const Eigen::MatrixXd analysis = inv_gamma.asDiagonal() * p.transpose() * w.asDiagonal();
  return analysis * values;
}

// ---------------------------------------------------------------------------

bool same_grid(const AnnulusGrid& a, const AnnulusGrid& b) {
  return &a == &b || a.spec() == b.spec();
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!same_grid(a.grid(), b.grid())) throw GridMismatch();
}

namespace {
void require_finite(const Eigen::MatrixXd& v) {
  if (!v.allFinite()) throw NonFinite("field contains NaN or Inf");
}
}  // namespace

ScalarField::ScalarField(GridPtr grid)
    : grid_(std::move(grid)), values_(Eigen::MatrixXd::Zero(grid_->n_r(), grid_->n_theta())) {}

ScalarField::ScalarField(GridPtr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_->n_r() || values_.cols() != grid_->n_theta())
    throw InvalidArgument("field shape does not match grid");
  require_finite(values_);
}

ScalarField ScalarField::from_cartesian(GridPtr grid,
                                        const std::function<double(double, double)>& f) {
  const Eigen::MatrixXd xs = grid->x();
  const Eigen::MatrixXd ys = grid->y();
  Eigen::MatrixXd v(grid->n_r(), grid->n_theta());
  for (int j = 0; j < v.cols(); ++j)
    for (int i = 0; i < v.rows(); ++i) v(i, j) = f(xs(i, j), ys(i, j));
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField ScalarField::from_polar(GridPtr grid,
                                    const std::function<double(double, double)>& f) {
  Eigen::MatrixXd v(grid->n_r(), grid->n_theta());
  for (int j = 0; j < v.cols(); ++j)
    for (int i = 0; i < v.rows(); ++i) v(i, j) = f(grid->r_nodes()[i], grid->theta_nodes()[j]);
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField ScalarField::constant(GridPtr grid, double c) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(grid->n_r(), grid->n_theta(), c);
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(*this, o);
  values_ += o.values_;
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(*this, o);
  values_ -= o.values_;
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  values_ *= s;
  require_finite(values_);
  return *this;
}

ScalarField ScalarField::times(const ScalarField& o) const {
  require_same_grid(*this, o);
  return ScalarField(grid_, values_.cwiseProduct(o.values_));
}

VectorField::VectorField(GridPtr grid, Eigen::MatrixXd radial, Eigen::MatrixXd angular)
    : grid_(std::move(grid)), radial_(std::move(radial)), angular_(std::move(angular)) {
  require_finite(radial_);
  require_finite(angular_);
}

VectorField VectorField::from_cartesian(GridPtr grid, const Eigen::MatrixXd& vx,
                                        const Eigen::MatrixXd& vy) {
  const auto& c = grid->cos_theta();
  const auto& s = grid->sin_theta();
  Eigen::MatrixXd vr = c.cwiseProduct(vx) + s.cwiseProduct(vy);
  Eigen::MatrixXd vt = c.cwiseProduct(vy) - s.cwiseProduct(vx);
  return VectorField(std::move(grid), std::move(vr), std::move(vt));
}

Eigen::MatrixXd VectorField::cartesian_x() const {
  return grid_->cos_theta().cwiseProduct(radial_) - grid_->sin_theta().cwiseProduct(angular_);
}

Eigen::MatrixXd VectorField::cartesian_y() const {
  return grid_->sin_theta().cwiseProduct(radial_) + grid_->cos_theta().cwiseProduct(angular_);
}

Eigen::MatrixXd VectorField::squared_norm() const {
  return radial_.cwiseAbs2() + angular_.cwiseAbs2();
}

VectorField gradient(const ScalarField& f) {
  const AnnulusGrid& g = f.grid();
  Eigen::MatrixXd dr = g.radial_derivative(f.values());
  Eigen::MatrixXd dt = g.theta_derivative(f.values()).cwiseQuotient(g.radius());
  return VectorField(f.grid_ptr(), std::move(dr), std::move(dt));
}

ScalarField divergence(const VectorField& v) {
  const AnnulusGrid& g = *v.grid_ptr();
  const Eigen::MatrixXd& r = g.radius();
  Eigen::MatrixXd out = g.radial_derivative(r.cwiseProduct(v.radial())) + g.theta_derivative(v.angular());
  return ScalarField(v.grid_ptr(), out.cwiseQuotient(r));
}

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

double integrate(const ScalarField& f) {
  return f.grid().quad_weights().cwiseProduct(f.values()).sum();
}

double dirichlet_inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  if (&f == &g) return f.grid().quad_weights().cwiseProduct(gradient(f).squared_norm()).sum();
  const VectorField gf = gradient(f);
  const VectorField gg = gradient(g);
  const Eigen::MatrixXd dot =
      gf.radial().cwiseProduct(gg.radial()) + gf.angular().cwiseProduct(gg.angular());
  return f.grid().quad_weights().cwiseProduct(dot).sum();
}

double l2_inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  return f.grid().quad_weights().cwiseProduct(f.values().cwiseProduct(g.values())).sum();
}

ThetaModes theta_modes(const ScalarField& f) {
  const AnnulusGrid& g = f.grid();
  Eigen::MatrixXcd c = g.forward_theta(f.values().cast<std::complex<double>>());
  return ThetaModes{f.grid_ptr(), c / static_cast<double>(g.n_theta())};
}

ScalarField inverse_theta_modes(const ThetaModes& modes) {
  const AnnulusGrid& g = *modes.grid;
  Eigen::MatrixXcd v = g.inverse_theta(modes.coeffs * static_cast<double>(g.n_theta()));
  return ScalarField(modes.grid, v.real());
}

bool is_numerically_constant(const ScalarField& f, double rel) {
  return std::sqrt(dirichlet_inner(f, f)) <= rel * f.max_abs();
}

ScalarField rotate(const ScalarField& f, int steps) {
  const int n = f.grid().n_theta();
  const int s = ((steps % n) + n) % n;
  Eigen::MatrixXd out(f.values().rows(), n);
  for (int j = 0; j < n; ++j) out.col(j) = f.values().col((j + s) % n);
  return ScalarField(f.grid_ptr(), std::move(out));
}

}  // namespace hsys
