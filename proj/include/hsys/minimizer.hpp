#pragma once

#include "hsys/energy.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hsys {

enum class InitMode { paper_xy, random_equivariant, from_file };

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

struct StepControls {
  double initial_step = 1.0;
  double backtrack = 0.5;
  /// Next trial step is growth * last accepted step when no Barzilai-Borwein
  /// estimate is available (first iteration, non-positive curvature). The BB
  /// step itself is clamped to [last / 16, 16 last].
  double growth = 2.0;
  double min_step = 1e-14;
  /// Armijo sufficient-decrease constant.
  double armijo = 1e-4;
};

struct MinimizeConfig {
  GridSpec grid;
  int m = 7;
  int max_iters = 10000;
  double grad_tol = 1e-7;
  StepControls step;
  std::uint64_t seed = 1;
  InitMode init = InitMode::random_equivariant;
  /// random_equivariant: (x, y) + perturbation * random F_m pair.
  double perturbation = 0.1;
  double decay = 0.5;
  /// Starting pair for InitMode::from_file (must live on `grid`).
  std::optional<FieldPair> initial_pair;
  int concentration_cells = 8;

  void validate() const;
};

struct TraceRecord {
  int iteration = 0;
  double energy = 0.0;
  /// H1 norm of the Sobolev gradient at this iterate.
  double grad_norm = 0.0;
  /// Step that produced this iterate (0 for the starting pair).
  double step = 0.0;
  /// Largest cell fraction of |grad phi|^2 (see concentration_report).
  double concentration = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
};

enum class StopReason { converged, max_iters, line_search_stall };
std::string to_string(StopReason reason);

struct Solution {
  FieldPair pair;
  EnergyEval eval;
  SymmetryOrder m;
  Trace trace;
  bool converged = false;
  StopReason stop = StopReason::max_iters;
  double grad_norm = 0.0;
};

/// Largest fractions of the energy measures mu = (|grad a|^2 + |grad b|^2)/2
/// and nu = |grad phi|^2 held by one box of a cells x cells polar partition.
/// A heuristic indicator of bubbling; it is not a verdict on concentration.
struct ConcentrationReport {
  double cell_fraction_nu = 0.0;
  double cell_fraction_mu = 0.0;
  int cells = 0;
  double cell_dr = 0.0;
  double cell_dtheta = 0.0;
};

/// Upper-estimate check of sqrt(m) G > E(x, y). G_hat comes from an m = 1
/// descent and only bounds G(Omega) from above, so condition_met is evidence
/// that minimizing sequences in F_m do not concentrate, not a proof.
struct ThresholdReport {
  double e_xy = 0.0;
  double g_hat = 0.0;
  int m = 1;
  double sqrt_m_times_g_hat = 0.0;
  bool condition_met = false;
  /// Smallest m with sqrt(m) G_hat > e_xy.
  int smallest_sufficient_m = 1;
  bool g_hat_converged = false;
  int g_hat_iterations = 0;
};

/// Starting pair of a run, already in F_m.
FieldPair initial_pair(const MinimizeConfig& cfg, const GridPtr& grid);

using IterateObserver = std::function<void(const FieldPair&, const EnergyEval&, const TraceRecord&)>;

/// Projected Sobolev-gradient descent with Armijo backtracking over F_m.
/// Accepted iterates are rescaled so |grad a|^2 + |grad b|^2 = 2.
Solution minimize(const MinimizeConfig& cfg, const IterateObserver& observer = {});

double max_cell_fraction(const AnnulusGrid& grid, const Eigen::MatrixXd& density, int cells);
ConcentrationReport concentration_report(const FieldPair& p, int cells = 8);
ConcentrationReport concentration_report(const FieldPair& p, const EnergyEval& e, int cells);

/// E(x, y) on the grid described by spec.
double identity_energy(const GridSpec& spec);
ThresholdReport threshold_check(const GridSpec& spec, SymmetryOrder m, const MinimizeConfig& budget);
/// One G_hat run shared by every m.
std::vector<ThresholdReport> threshold_scan(const GridSpec& spec, const std::vector<int>& ms,
                                            const MinimizeConfig& budget);

}  // namespace hsys
