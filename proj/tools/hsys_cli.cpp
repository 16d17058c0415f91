// hsys: command-line driver.
//
//   hsys solve     --r0 0.5 --m 7 --nr 128 --ntheta 280 --tol 1e-7 --out run.json
//   hsys threshold --r0 0.5 --m 16 --out threshold.json
//   hsys verify    --solution sol.json --out cert.json
//
// Exit codes: 0 success, 2 usage, 3 not converged (solve) or failed
// certificate (verify), 4 runtime error.

#include "hsys/errors.hpp"
#include "hsys/report_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNotConverged = 3;
constexpr int kRuntime = 4;

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveArgs {
  hsys::MinimizeConfig cfg;
  std::string init = "random_equivariant";
  std::string init_file;
  std::string out;
  std::string solution;
  std::string mesh;
  bool triangulate = false;
  double seam_tol = 1e-10;
  bool verbose = false;
};

struct ThresholdArgs {
  hsys::GridSpec grid{0.5, 48, 96};
  std::vector<int> ms;
  hsys::MinimizeConfig budget;
  std::string out;
};

struct VerifyArgs {
  std::string solution;
  std::string out;
};

void emit(const json& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    hsys::write_json(report, out);
  }
}

void add_grid_options(CLI::App* cmd, hsys::GridSpec& grid) {
  cmd->add_option("--r0", grid.r0, "inner radius, 0 < r0 < 1")->capture_default_str();
  cmd->add_option("--nr", grid.n_r, "radial nodes (>= 8)")->capture_default_str();
  cmd->add_option("--ntheta", grid.n_theta, "angular nodes (even, >= 8)")->capture_default_str();
}

int run_solve(SolveArgs& args) {
  const auto t0 = Clock::now();
  hsys::MinimizeConfig& cfg = args.cfg;
  try {
    cfg.init = hsys::init_mode_from_string(args.init);
    if (cfg.init == hsys::InitMode::from_file) {
      if (args.init_file.empty()) throw UsageError("--init from_file needs --init-file");
    } else if (!args.init_file.empty()) {
      throw UsageError("--init-file requires --init from_file");
    }
    cfg.grid.validate();
    if (cfg.init != hsys::InitMode::from_file) cfg.validate();
  } catch (const hsys::InvalidArgument& e) {
    throw UsageError(e.what());
  }

  if (cfg.init == hsys::InitMode::from_file) {
    hsys::SolutionFile file = hsys::read_solution(args.init_file);
    if (!(file.grid == cfg.grid)) throw hsys::GridMismatch();
    cfg.initial_pair = std::move(file.pair);
    try {
      cfg.validate();
    } catch (const hsys::InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }

  hsys::IterateObserver observer;
  if (args.verbose) {
    observer = [](const hsys::FieldPair&, const hsys::EnergyEval&, const hsys::TraceRecord& r) {
      if (r.iteration % 50 == 0)
        std::fprintf(stderr, "iter %6d  E %.15g  |g| %.3e  step %.3e\n", r.iteration, r.energy,
                     r.grad_norm, r.step);
    };
  }
  const auto t_min = Clock::now();
  const hsys::Solution sol = hsys::minimize(cfg, observer);
  const double minimize_s = seconds_since(t_min);

  const auto t_cert = Clock::now();
  const hsys::CertificateReport cert = hsys::certify(sol);
  const double certify_s = seconds_since(t_cert);

  json config = hsys::to_json(cfg);
  config["init_file"] = args.init_file.empty() ? json(nullptr) : json(args.init_file);

  json report{{"schema", hsys::kReportSchemaId},
              {"command", "solve"},
              {"config", config},
              {"seed", cfg.seed},
              {"energy", hsys::to_json(sol.eval)},
              {"trace", hsys::trace_summary(sol)},
              {"concentration", hsys::to_json(hsys::concentration_report(sol.pair, sol.eval,
                                                                          cfg.concentration_cells))},
              {"certificate", hsys::to_json(cert)}};

  json artifacts{{"solution", nullptr}, {"mesh", nullptr}};
  if (!args.solution.empty()) {
    hsys::write_solution(args.solution, sol.pair, sol.m, sol.eval);
    artifacts["solution"] = args.solution;
  }
  if (!args.mesh.empty()) {
    const hsys::MapTriple u = hsys::assemble_map(sol);
    const hsys::SurfaceMesh mesh = hsys::double_surface(u, args.seam_tol);
    const bool ply = args.mesh.size() > 4 && args.mesh.substr(args.mesh.size() - 4) == ".ply";
    if (ply) {
      hsys::export_ply(mesh, args.mesh, args.triangulate);
    } else {
      hsys::export_obj(mesh, args.mesh, args.triangulate);
    }
    json topo = hsys::to_json(hsys::mesh_topology(mesh));
    topo["seam_gap_before_weld"] = hsys::seam_gap(u);
    report["mesh"] = topo;
    artifacts["mesh"] = args.mesh;
  }
  report["artifacts"] = artifacts;
  report["timings"] = {{"minimize_seconds", minimize_s},
                       {"certify_seconds", certify_s},
                       {"total_seconds", seconds_since(t0)}};
  emit(report, args.out);
  if (!sol.converged) {
    std::fprintf(stderr, "hsys: not converged (%s) after %zu iterations, |g| = %.3e\n",
                 hsys::to_string(sol.stop).c_str(), sol.trace.records.size(), sol.grad_norm);
    return kNotConverged;
  }
  return kOk;
}

int run_threshold(ThresholdArgs& args) {
  const auto t0 = Clock::now();
  try {
    args.grid.validate();
    for (int m : args.ms) hsys::SymmetryOrder check(m);
    args.budget.grid = args.grid;
    args.budget.m = 1;
    args.budget.validate();
  } catch (const hsys::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const std::vector<hsys::ThresholdReport> reps = hsys::threshold_scan(args.grid, args.ms, args.budget);
  json results = json::array();
  for (const auto& r : reps) results.push_back(hsys::to_json(r));
  json budget = hsys::to_json(args.budget);
  json report{{"schema", hsys::kReportSchemaId},
              {"command", "threshold"},
              {"config", budget},
              {"seed", args.budget.seed},
              {"threshold", results.size() == 1 ? results.front() : results},
              {"timings", {{"total_seconds", seconds_since(t0)}}}};
  emit(report, args.out);
  return kOk;
}

int run_verify(VerifyArgs& args) {
  const auto t0 = Clock::now();
  const hsys::SolutionFile file = hsys::read_solution(args.solution);
  const hsys::EnergyEval eval = hsys::evaluate(file.pair);  // phi is always recomputed
  const hsys::CertificateReport cert = hsys::certify(file.pair, eval, hsys::SymmetryOrder(file.m));
  json report{{"schema", hsys::kReportSchemaId},
              {"command", "verify"},
              {"config", {{"grid", hsys::to_json(file.grid)}, {"m", file.m}, {"solution", args.solution}}},
              {"energy", hsys::to_json(eval)},
              {"stored", {{"lambda", file.lambda}, {"energy", file.energy}}},
              {"certificate", hsys::to_json(cert)},
              {"timings", {{"total_seconds", seconds_since(t0)}}}};
  emit(report, args.out);
  return cert.passed ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant minimization of the H-system energy on an annulus"};
  app.require_subcommand(1);

  SolveArgs solve;
  solve.cfg.grid = {0.5, 64, 128};
  CLI::App* cmd_solve = app.add_subcommand("solve", "minimize E over F_m, certify, export");
  add_grid_options(cmd_solve, solve.cfg.grid);
  cmd_solve->add_option("--m", solve.cfg.m, "symmetry order (divides ntheta)")->capture_default_str();
  cmd_solve->add_option("--tol", solve.cfg.grad_tol, "H1 gradient tolerance")->capture_default_str();
  cmd_solve->add_option("--max-iters", solve.cfg.max_iters)->capture_default_str();
  cmd_solve->add_option("--seed", solve.cfg.seed)->capture_default_str();
  cmd_solve->add_option("--init", solve.init, "paper_xy | random_equivariant | from_file")
      ->capture_default_str();
  cmd_solve->add_option("--init-file", solve.init_file, "solution file for --init from_file");
  cmd_solve->add_option("--perturbation", solve.cfg.perturbation)->capture_default_str();
  cmd_solve->add_option("--decay", solve.cfg.decay)->capture_default_str();
  cmd_solve->add_option("--cells", solve.cfg.concentration_cells, "concentration cells per side")
      ->capture_default_str();
  cmd_solve->add_option("--out", solve.out, "JSON report (stdout if omitted)");
  cmd_solve->add_option("--solution", solve.solution, "write the solution file");
  cmd_solve->add_option("--mesh", solve.mesh, "doubled surface, .obj or .ply");
  cmd_solve->add_flag("--triangulate", solve.triangulate, "split quads into triangles");
  cmd_solve->add_option("--seam-tol", solve.seam_tol, "relative seam gap allowed before welding")
      ->capture_default_str();
  cmd_solve->add_flag("-v,--verbose", solve.verbose, "progress on stderr");

  ThresholdArgs threshold;
  threshold.budget.max_iters = 3000;
  CLI::App* cmd_threshold =
      app.add_subcommand("threshold", "compare sqrt(m) G_hat with E(x, y)");
  add_grid_options(cmd_threshold, threshold.grid);
  cmd_threshold->add_option("--m", threshold.ms, "symmetry order(s)")->required();
  cmd_threshold->add_option("--tol", threshold.budget.grad_tol)->capture_default_str();
  cmd_threshold->add_option("--max-iters", threshold.budget.max_iters)->capture_default_str();
  cmd_threshold->add_option("--seed", threshold.budget.seed)->capture_default_str();
  cmd_threshold->add_option("--out", threshold.out, "JSON report (stdout if omitted)");

  VerifyArgs verify;
  CLI::App* cmd_verify = app.add_subcommand("verify", "re-certify a saved solution");
  cmd_verify->add_option("--solution", verify.solution)->required();
  cmd_verify->add_option("--out", verify.out, "JSON report (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*cmd_solve) return run_solve(solve);
    if (*cmd_threshold) return run_threshold(threshold);
    if (*cmd_verify) return run_verify(verify);
  } catch (const UsageError& e) {
    std::cerr << "hsys: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "hsys: error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
