#include "hsys/errors.hpp"
#include "hsys/minimizer.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hsys;

namespace {

MinimizeConfig small_config(int m = 7) {
  MinimizeConfig cfg;
  cfg.grid = {0.5, 24, 56};
  cfg.m = m;
  cfg.grad_tol = 1e-7;
  cfg.max_iters = 2000;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(Minimize, ConvergesMonotoneInFm) {
  const MinimizeConfig cfg = small_config();
  const SymmetryOrder m(cfg.m);
  double worst_defect = 0.0, worst_mean = 0.0, worst_norm = 0.0;
  const Solution sol = minimize(cfg, [&](const FieldPair& p, const EnergyEval& e, const TraceRecord&) {
    worst_defect = std::max(worst_defect, equivariance_defect(p, m));
    worst_mean = std::max({worst_mean, std::abs(integrate(p.a)), std::abs(integrate(p.b))});
    worst_norm = std::max(worst_norm, std::abs(e.grad_a_sq + e.grad_b_sq - 2.0));
  });
  ASSERT_TRUE(sol.converged) << to_string(sol.stop);
  EXPECT_LE(sol.grad_norm, cfg.grad_tol);
  const auto& recs = sol.trace.records;
  for (std::size_t k = 1; k < recs.size(); ++k) EXPECT_LE(recs[k].energy, recs[k - 1].energy + 1e-14) << k;
  EXPECT_LE(worst_defect, 1e-10);
  EXPECT_LE(worst_mean, 1e-10);
  EXPECT_LE(worst_norm, 1e-12);
  EXPECT_LT(sol.eval.value, oracle::energy_xy(0.5));
  EXPECT_NEAR(recs.back().energy, sol.eval.value, 1e-14 * sol.eval.value);
  const EnergyEval fresh = evaluate(sol.pair);
  EXPECT_EQ(fresh.value, sol.eval.value);
  EXPECT_EQ(fresh.phi.values(), sol.eval.phi.values());
}

TEST(Minimize, IdentityStartDescendsBelowItsEnergy) {
  MinimizeConfig cfg = small_config();
  cfg.init = InitMode::paper_xy;
  const Solution sol = minimize(cfg);
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.trace.records.front().energy, identity_energy(cfg.grid), 1e-12);
  EXPECT_LE(sol.eval.value, identity_energy(cfg.grid));
}

TEST(Minimize, DeterministicTraces) {
  const MinimizeConfig cfg = small_config(4);
  const Solution s1 = minimize(cfg);
  const Solution s2 = minimize(cfg);
  ASSERT_EQ(s1.trace.records.size(), s2.trace.records.size());
  for (std::size_t k = 0; k < s1.trace.records.size(); ++k) {
    EXPECT_EQ(s1.trace.records[k].energy, s2.trace.records[k].energy);
    EXPECT_EQ(s1.trace.records[k].grad_norm, s2.trace.records[k].grad_norm);
    EXPECT_EQ(s1.trace.records[k].step, s2.trace.records[k].step);
  }
  EXPECT_EQ(s1.pair.a.values(), s2.pair.a.values());
}

TEST(Minimize, SingleIterationHugeToleranceIsNoOp) {
  MinimizeConfig cfg = small_config();
  cfg.max_iters = 1;
  cfg.grad_tol = 1e30;
  const Solution sol = minimize(cfg);
  ASSERT_EQ(sol.trace.records.size(), 1u);
  EXPECT_TRUE(sol.converged);
  const GridPtr g = build_grid(cfg.grid);
  const FieldPair start = initial_pair(cfg, g);
  EXPECT_NEAR(sol.eval.value, evaluate(start).value, 1e-12 * sol.eval.value);
  // Only the normalization rescales the starting pair.
  const double s = sol.pair.a.max_abs() / start.a.max_abs();
  EXPECT_LE((sol.pair.a - s * start.a).max_abs(), 1e-13);
}

TEST(Minimize, FromFileRequiresPair) {
  MinimizeConfig cfg = small_config();
  cfg.init = InitMode::from_file;
  EXPECT_THROW(minimize(cfg), InvalidArgument);
  const GridPtr g = build_grid(cfg.grid);
  cfg.initial_pair = identity_pair(g);
  EXPECT_TRUE(minimize(cfg).converged);
  cfg.initial_pair = identity_pair(build_grid({0.5, 16, 56}));
  EXPECT_THROW(minimize(cfg), GridMismatch);
}

TEST(MinimizeConfig, Validation) {
  MinimizeConfig cfg = small_config();
  cfg.m = 5;  // does not divide 56
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.grad_tol = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.step.backtrack = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_THROW(init_mode_from_string("sideways"), InvalidArgument);
  EXPECT_EQ(init_mode_from_string(to_string(InitMode::paper_xy)), InitMode::paper_xy);
}

TEST(Concentration, RadialPhiSpreadsOverSectors) {
  // Direct summation of (phi')^2 r w dtheta per radial band from the closed form.
  const double r0 = 0.5;
  const int cells = 8;
  const GridPtr g = build_grid({r0, 128, 64});
  const ConcentrationReport rep = concentration_report(identity_pair(g), cells);
  std::vector<double> band(cells, 0.0);
  double total = 0.0;
  for (int i = 0; i < g->n_r(); ++i) {
    const double r = g->r_nodes()(i);
    const int c = std::min(cells - 1, static_cast<int>(std::floor((r - r0) / (1 - r0) * cells)));
    const double mass = std::pow(oracle::dphi(r, r0), 2) * r * g->radial_weights()(i);
    band[c] += mass;
    total += mass;
  }
  const double expect = *std::max_element(band.begin(), band.end()) / total / cells;
  EXPECT_NEAR(rep.cell_fraction_nu, expect, 1e-8);
  EXPECT_LT(rep.cell_fraction_nu, 1.0 / cells);
  // mu = (|grad x|^2 + |grad y|^2) / 2 = 1: fraction is the largest cell area share.
  EXPECT_NEAR(rep.cell_fraction_mu, (1.0 - std::pow(1 - 0.5 / cells, 2)) / (1 - r0 * r0) / cells, 2e-2 / cells);
}

TEST(Concentration, SingleCellSupport) {
  const GridPtr g = build_grid({0.5, 32, 32});
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(32, 32);
  d(16, 3) = 1.0;
  d(17, 2) = 2.0;
  EXPECT_NEAR(max_cell_fraction(*g, d, 4), 1.0, 1e-15);
  EXPECT_THROW(max_cell_fraction(*g, d, 1), InvalidArgument);
}

TEST(Threshold, ScanProperties) {
  MinimizeConfig budget;
  budget.max_iters = 3000;
  const GridSpec spec{0.5, 24, 64};
  const auto reps = threshold_scan(spec, {1, 2, 4, 8, 16}, budget);
  ASSERT_EQ(reps.size(), 5u);
  EXPECT_NEAR(reps[0].e_xy, oracle::energy_xy(0.5), 1e-9);
  EXPECT_FALSE(reps[0].condition_met);
  EXPECT_LE(reps[0].g_hat, reps[0].e_xy + 1e-6);
  for (std::size_t k = 1; k < reps.size(); ++k) {
    EXPECT_GT(reps[k].sqrt_m_times_g_hat, reps[k - 1].sqrt_m_times_g_hat);
    EXPECT_EQ(reps[k].g_hat, reps[0].g_hat);
  }
  const int need = reps[0].smallest_sufficient_m;
  EXPECT_GT(std::sqrt(double(need)) * reps[0].g_hat, reps[0].e_xy);
  EXPECT_LE(std::sqrt(double(need - 1)) * reps[0].g_hat, reps[0].e_xy);
  for (const auto& r : reps) EXPECT_EQ(r.condition_met, r.m >= need);
}
