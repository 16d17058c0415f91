#include "hsys/minimizer.hpp"

#include "hsys/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace hsys {

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::paper_xy: return "paper_xy";
    case InitMode::random_equivariant: return "random_equivariant";
    case InitMode::from_file: return "from_file";
  }
  return "unknown";
}

InitMode init_mode_from_string(const std::string& name) {
  if (name == "paper_xy") return InitMode::paper_xy;
  if (name == "random_equivariant") return InitMode::random_equivariant;
  if (name == "from_file") return InitMode::from_file;
  throw InvalidArgument("unknown init mode '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_stall: return "line_search_stall";
  }
  return "unknown";
}

void MinimizeConfig::validate() const {
  grid.validate();
  SymmetryOrder order(m);
  if (grid.n_theta % m != 0) throw InvalidArgument("m must divide n_theta");
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (!(step.initial_step > 0.0) || !(step.min_step > 0.0))
    throw InvalidArgument("step sizes must be positive");
  if (!(step.backtrack > 0.0 && step.backtrack < 1.0))
    throw InvalidArgument("backtrack factor must lie in (0, 1)");
  if (!(step.growth >= 1.0)) throw InvalidArgument("growth factor must be >= 1");
  if (!(step.armijo > 0.0 && step.armijo < 1.0))
    throw InvalidArgument("armijo constant must lie in (0, 1)");
  if (!(decay > 0.0)) throw InvalidArgument("decay must be positive");
  if (concentration_cells < 2) throw InvalidArgument("concentration_cells must be >= 2");
  if (init == InitMode::from_file && !initial_pair)
    throw InvalidArgument("init mode from_file needs an initial pair");
}

FieldPair initial_pair(const MinimizeConfig& cfg, const GridPtr& grid) {
  const SymmetryOrder m(cfg.m);
  switch (cfg.init) {
    case InitMode::paper_xy:
      return project_fm(identity_pair(grid), m);
    case InitMode::random_equivariant:
      return project_fm(identity_pair(grid) +
                            cfg.perturbation * random_equivariant(grid, m, cfg.seed, cfg.decay),
                        m);
    case InitMode::from_file: {
      const FieldPair& src = *cfg.initial_pair;
      if (!same_grid(src.grid(), *grid)) throw GridMismatch();
      // Rebind onto this run's grid object.
      return project_fm(FieldPair(ScalarField(grid, src.a.values()),
                                  ScalarField(grid, src.b.values())),
                        m);
    }
  }
  throw InvalidArgument("unknown init mode");
}

namespace {

// Rescales so |grad a|^2 + |grad b|^2 = 2; returns the factor applied to p.
double normalize(FieldPair& p, EnergyEval& e) {
  const double s2 = 2.0 / (e.grad_a_sq + e.grad_b_sq);
  const double s = std::sqrt(s2);
  p *= s;
  e.grad_a_sq *= s2;
  e.grad_b_sq *= s2;
  e.grad_phi_norm *= s2;
  e.phi *= s2;
  const double num = e.grad_a_sq + e.grad_b_sq;
  e.value = num / (2.0 * e.grad_phi_norm);
  e.lambda = -std::sqrt(num / 2.0) / e.grad_phi_norm;
  return s;
}

double covector_dot(const FieldPair& cov, const FieldPair& d) {
  return cov.a.values().cwiseProduct(d.a.values()).sum() +
         cov.b.values().cwiseProduct(d.b.values()).sum();
}

FieldPair riesz(const FieldPair& cov, SymmetryOrder m) {
  const AnnulusGrid& g = cov.grid();
  FieldPair raw(ScalarField(cov.grid_ptr(), g.solve_modes(ModeOperator::neumann_h1, cov.a.values())),
                ScalarField(cov.grid_ptr(), g.solve_modes(ModeOperator::neumann_h1, cov.b.values())));
  return project_fm(raw, m);
}

double nu_fraction(const EnergyEval& e, int cells) {
  return max_cell_fraction(e.phi.grid(), gradient(e.phi).squared_norm(), cells);
}

// Relative size below which computed energy differences are dominated by
// round-off and the line search switches to derivative information.
constexpr double kRoundoffRegime = 1e-10;
// Accepted iterates never raise E by more than this.
constexpr double kMonotoneSlack = 1e-14;

}  // namespace

Solution minimize(const MinimizeConfig& cfg, const IterateObserver& observer) {
  cfg.validate();
  const GridPtr grid = build_grid(cfg.grid);
  const SymmetryOrder m(cfg.m);
  const StepControls& sc = cfg.step;

  FieldPair pair = initial_pair(cfg, grid);
  EnergyEval eval = evaluate(pair);  // degenerate start propagates
  normalize(pair, eval);
  FieldPair cov = energy_covector(pair, eval);

  Trace trace;
  double step = sc.initial_step;
  double last_step = 0.0;
  StopReason stop = StopReason::max_iters;
  double grad_norm = 0.0;
  std::optional<FieldPair> prev_pair, prev_cov;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const FieldPair g = riesz(cov, m);
    // g is the Riesz representative of cov on F_m, so |g|_H1^2 = cov . g.
    const double slope = covector_dot(cov, g);
    grad_norm = std::sqrt(std::max(0.0, slope));

    TraceRecord rec;
    rec.iteration = it;
    rec.energy = eval.value;
    rec.grad_norm = grad_norm;
    rec.step = last_step;
    rec.concentration = nu_fraction(eval, cfg.concentration_cells);
    trace.records.push_back(rec);
    if (observer) observer(pair, eval, rec);

    if (grad_norm <= cfg.grad_tol) {
      stop = StopReason::converged;
      break;
    }
    if (it + 1 == cfg.max_iters) break;

    // Barzilai-Borwein trial step in the H1 metric.
    if (prev_pair) {
      const FieldPair dx = pair - *prev_pair;
      const double curv = covector_dot(cov - *prev_cov, dx);
      if (curv > 0.0) {
        const double bb = h1_inner(dx, dx) / curv;
        step = std::clamp(bb, last_step / 16.0, last_step * 16.0);
      }
    }

    bool accepted = false;
    while (step >= sc.min_step) {
      try {
        FieldPair cand = pair - step * g;
        EnergyEval ce = evaluate(cand);
        const double predicted = step * slope;
        bool ok = ce.value <= eval.value - sc.armijo * predicted;
        std::optional<FieldPair> cand_cov;
        if (!ok && predicted <= kRoundoffRegime * std::abs(eval.value) &&
            ce.value <= eval.value + kMonotoneSlack) {
          // Approximate Armijo: the change along the ray estimated by the
          // trapezoid rule on directional derivatives.
          cand_cov = energy_covector(cand, ce);
          const double end_slope = -covector_dot(*cand_cov, g);
          ok = end_slope <= (1.0 - 2.0 * sc.armijo) * slope;
        }
        if (ok) {
          prev_pair = std::move(pair);
          prev_cov = std::move(cov);
          const double s = normalize(cand, ce);
          if (cand_cov) {
            // E is scale invariant, so its covector scales by 1 / s.
            cov = std::move(*cand_cov) * (1.0 / s);
          } else {
            cov = energy_covector(cand, ce);
          }
          *prev_pair *= s;
          *prev_cov *= 1.0 / s;
          pair = std::move(cand);
          eval = std::move(ce);
          accepted = true;
          break;
        }
      } catch (const DegeneratePair&) {
      }
      step *= sc.backtrack;
    }
    if (!accepted) {
      stop = StopReason::line_search_stall;
      break;
    }
    last_step = step;
    step *= sc.growth;
  }

  // Fresh evaluation, so eval is exactly what evaluate() gives for the stored
  // pair (phi was carried through rescaling above).
  eval = evaluate(pair);
  return Solution{std::move(pair), std::move(eval), m, std::move(trace),
                  stop == StopReason::converged, stop, grad_norm};
}

double max_cell_fraction(const AnnulusGrid& grid, const Eigen::MatrixXd& density, int cells) {
  if (cells < 2) throw InvalidArgument("concentration cells must be >= 2");
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(cells, cells);
  const Eigen::MatrixXd& w = grid.quad_weights();
  const double r0 = grid.r0();
  for (int i = 0; i < grid.n_r(); ++i) {
    const double t = (grid.r_nodes()[i] - r0) / (1.0 - r0);
    const int ci = std::min(cells - 1, static_cast<int>(std::floor(t * cells)));
    for (int j = 0; j < grid.n_theta(); ++j) {
      const int cj = static_cast<int>((static_cast<long>(j) * cells) / grid.n_theta());
      mass(ci, cj) += w(i, j) * density(i, j);
    }
  }
  const double total = mass.sum();
  if (!(total > 0.0)) return 0.0;
  return mass.maxCoeff() / total;
}

ConcentrationReport concentration_report(const FieldPair& p, int cells) {
  return concentration_report(p, evaluate(p), cells);
}

ConcentrationReport concentration_report(const FieldPair& p, const EnergyEval& e, int cells) {
  const AnnulusGrid& g = p.grid();
  const Eigen::MatrixXd mu =
      0.5 * (gradient(p.a).squared_norm() + gradient(p.b).squared_norm());
  const Eigen::MatrixXd nu = gradient(e.phi).squared_norm();
  ConcentrationReport rep;
  rep.cells = cells;
  rep.cell_fraction_mu = max_cell_fraction(g, mu, cells);
  rep.cell_fraction_nu = max_cell_fraction(g, nu, cells);
  rep.cell_dr = (1.0 - g.r0()) / cells;
  rep.cell_dtheta = 2.0 * std::numbers::pi / cells;
  return rep;
}

double identity_energy(const GridSpec& spec) {
  return evaluate(identity_pair(build_grid(spec))).value;
}

std::vector<ThresholdReport> threshold_scan(const GridSpec& spec, const std::vector<int>& ms,
                                            const MinimizeConfig& budget) {
  for (int m : ms) SymmetryOrder check(m);
  const double e_xy = identity_energy(spec);
  MinimizeConfig unconstrained = budget;
  unconstrained.grid = spec;
  unconstrained.m = 1;
  const Solution run = minimize(unconstrained);
  const double g_hat = run.eval.value;

  std::vector<ThresholdReport> out;
  for (int m : ms) {
    ThresholdReport rep;
    rep.e_xy = e_xy;
    rep.g_hat = g_hat;
    rep.m = m;
    rep.sqrt_m_times_g_hat = std::sqrt(static_cast<double>(m)) * g_hat;
    rep.condition_met = rep.sqrt_m_times_g_hat > e_xy;
    const double ratio = e_xy / g_hat;
    int need = std::max(1, static_cast<int>(std::floor(ratio * ratio)));
    while (std::sqrt(static_cast<double>(need)) * g_hat <= e_xy) ++need;
    rep.smallest_sufficient_m = need;
    rep.g_hat_converged = run.converged;
    rep.g_hat_iterations = static_cast<int>(run.trace.records.size());
    out.push_back(rep);
  }
  return out;
}

ThresholdReport threshold_check(const GridSpec& spec, SymmetryOrder m, const MinimizeConfig& budget) {
  return threshold_scan(spec, {m.value()}, budget).front();
}

}  // namespace hsys
