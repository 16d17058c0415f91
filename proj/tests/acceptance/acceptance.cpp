// Acceptance checks, one PASS/FAIL line each. Usage: acceptance <path to hsys>

#include "hsys/errors.hpp"
#include "hsys/jacobian_poisson.hpp"
#include "hsys/report_io.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace hsys;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScalarField xf(const GridPtr& g) { return ScalarField::from_cartesian(g, [](double x, double) { return x; }); }
ScalarField yf(const GridPtr& g) { return ScalarField::from_cartesian(g, [](double, double y) { return y; }); }

// Errors of a spectral scheme fall geometrically until they reach round-off.
bool contracts(const std::vector<double>& errs, double floor) {
  for (std::size_t k = 1; k < errs.size(); ++k)
    if (errs[k] > std::max(0.5 * errs[k - 1], floor)) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double e : v) s += fmt("%s%.1e", s.empty() ? "" : " ", e);
  return s;
}

double poisson_error(int nr) {
  const double r0 = 0.5;
  const GridPtr g = build_grid({r0, nr, 8});
  const ScalarField phi = solve_dirichlet(ScalarField::constant(g, 1.0));
  const ScalarField exact = ScalarField::from_polar(g, [=](double r, double) { return oracle::phi(r, r0); });
  const ScalarField diff = phi - exact;
  return std::sqrt(l2_inner(diff, diff) / l2_inner(exact, exact));
}

void criterion_poisson() {
  const auto t0 = Clock::now();
  const double fine = poisson_error(256);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::vector<double> errs;
  for (int nr : {8, 10, 12, 14, 16, 20}) errs.push_back(poisson_error(nr));
  const bool ok = fine <= 1e-8 && contracts(errs, 1e-13) && secs < 1.0;
  report(1, ok, fmt("rel L2 %.2e at n_r=256 in %.3f s; n_r=8..20: %s", fine, secs, join(errs).c_str()));
}

void criterion_bracket() {
  const GridPtr g = build_grid({0.5, 128, 256});
  const double err = (bracket(xf(g), yf(g)) - ScalarField::constant(g, 1.0)).max_abs();
  report(2, err <= 1e-8, fmt("max |{x,y} - 1| = %.2e", err));
}

double exchange_residual(int nr) {
  const GridPtr g = build_grid({0.5, nr, 16});
  return lemma2_identity_residual(xf(g), yf(g), solve_dirichlet(bracket(xf(g), yf(g))));
}

void criterion_exchange_identity() {
  const double fine = exchange_residual(256);
  std::vector<double> errs;
  for (int nr : {8, 9, 10, 11, 12}) errs.push_back(exchange_residual(nr));
  report(3, fine <= 1e-6 && contracts(errs, 1e-13),
         fmt("residual %.2e at n_r=256; n_r=8..12: %s", fine, join(errs).c_str()));
}

void criterion_energy() {
  const double e = evaluate(identity_pair(build_grid({0.5, 128, 64}))).value;
  const double exact = oracle::energy_xy(0.5);
  const double rel = std::abs(e - exact) / exact;
  report(4, rel <= 1e-6, fmt("E(x,y) = %.13f, closed form %.13f, rel %.1e", e, exact, rel));
}

void criterion_gradient() {
  const GridPtr g = build_grid({0.5, 32, 60});
  double worst = 0.0, worst_scale = 0.0;
  const double h = 1e-5;
  for (std::uint64_t s = 0; s < 24; ++s) {
    const SymmetryOrder m(static_cast<int>(1 + s % 6));
    const FieldPair p = identity_pair(g) + 0.5 * random_equivariant(g, m, 1000 + s);
    const FieldPair d = random_equivariant(g, m, 2000 + s);
    const double fv = first_variation(p, d);
    const double fd = (evaluate(p + h * d).value - evaluate(p - h * d).value) / (2 * h);
    worst = std::max(worst, std::abs(fv - fd) / std::max(std::abs(fd), 1e-3));
    worst_scale = std::max(worst_scale, std::abs(first_variation(p, p)));
  }
  report(5, worst <= 1e-5 && worst_scale <= 1e-8,
         fmt("24 pairs: max rel FD mismatch %.1e, max |dE(p)[p]| %.1e", worst, worst_scale));
}

struct Run {
  int m;
  Solution sol;
  double seconds;
  bool monotone = true;
  double max_defect = 0.0, max_mean = 0.0;
};

Run run_minimization(int m) {
  MinimizeConfig cfg;
  cfg.grid = {0.5, 128, 280};
  cfg.m = m;
  cfg.grad_tol = 1e-7;
  cfg.max_iters = 10000;
  cfg.seed = 1;
  const SymmetryOrder order(m);
  bool monotone = true;
  double max_defect = 0.0, max_mean = 0.0;
  double last = INFINITY;
  const auto t0 = Clock::now();
  Solution sol = minimize(cfg, [&](const FieldPair& p, const EnergyEval& e, const TraceRecord&) {
    if (e.value > last + 1e-14) monotone = false;
    last = e.value;
    max_defect = std::max(max_defect, equivariance_defect(p, order));
    max_mean = std::max({max_mean, std::abs(integrate(p.a)), std::abs(integrate(p.b))});
  });
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return Run{m, std::move(sol), secs, monotone, max_defect, max_mean};
}

void criterion_minimize(const std::vector<Run>& runs) {
  bool ok = true;
  std::string detail;
  for (const Run& r : runs) {
    const bool this_ok = r.sol.converged && r.sol.trace.records.size() <= 10000 && r.monotone &&
                         r.max_defect <= 1e-9 && r.max_mean <= 1e-9;
    ok = ok && this_ok;
    detail += fmt("[m=%d %s, %zu iters, E=%.12f, monotone=%d, defect %.1e, means %.1e, %.1f s] ", r.m,
                  to_string(r.sol.stop).c_str(), r.sol.trace.records.size(), r.sol.eval.value, r.monotone,
                  r.max_defect, r.max_mean, r.seconds);
  }
  report(6, ok, detail);
}

void criterion_certificate(const std::vector<Run>& runs) {
  bool ok = true;
  std::string detail;
  for (const Run& r : runs) {
    const CertificateReport c = certify(r.sol);
    const bool this_ok = c.checks.el_residual && c.checks.bc_phi && c.checks.bc_neumann &&
                         c.grad_orthogonality <= 1e-6 && c.norm_balance <= 1e-6 &&
                         c.hopf.fit_residual <= 1e-3 && c.hopf.imag_fraction <= 1e-3;
    ok = ok && this_ok && c.passed;
    detail += fmt("[m=%d EL %.1e (tol %.1e), bc phi %.1e, neumann %.1e/%.1e (tol %.1e), orth %.1e, "
                  "balance %.1e, hopf res %.1e, imag %.1e, all checks %d] ",
                  r.m, c.el_residual_interior, c.tolerances.el(), c.bc_phi, c.bc_neumann_a, c.bc_neumann_b,
                  c.tolerances.boundary(), c.grad_orthogonality, c.norm_balance, c.hopf.fit_residual,
                  c.hopf.imag_fraction, c.passed);
  }
  report(7, ok, detail);
}

void criterion_threshold() {
  MinimizeConfig budget;
  budget.max_iters = 3000;
  std::vector<int> ms;
  for (int m = 1; m <= 64; ++m) ms.push_back(m);
  const auto reps = threshold_scan({0.5, 48, 96}, ms, budget);
  const ThresholdReport& r = reps.front();
  int first = 0;
  for (const auto& t : reps)
    if (t.condition_met) {
      first = t.m;
      break;
    }
  const bool ok = r.e_xy >= r.g_hat - 1e-6 && first > 0 && first == r.smallest_sufficient_m &&
                  std::abs(r.e_xy - oracle::energy_xy(0.5)) <= 1e-8;
  report(8, ok, fmt("E_xy %.10f, G_hat %.10f (%s), smallest m with sqrt(m) G_hat > E_xy: %d", r.e_xy, r.g_hat,
                    r.g_hat_converged ? "converged" : "budget exhausted", first));
}

void criterion_surface(const Run& run, const fs::path& dir) {
  const MapTriple u = assemble_map(run.sol);
  const SurfaceMesh mesh = double_surface(u);
  const MeshTopology t = mesh_topology(mesh);
  const AnnulusGrid& g = run.sol.pair.grid();
  double seam = 0.0;
  for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
    if (mesh.provenance[k] == VertexTag::seam) seam = std::max(seam, std::abs(mesh.vertices[k].z()));
  const fs::path obj = dir / "doubled.obj";
  export_obj(mesh, obj);
  const SurfaceMesh back = read_obj(obj);
  bool same = back.vertices.size() == mesh.vertices.size() && back.faces == mesh.faces;
  for (std::size_t k = 0; same && k < mesh.vertices.size(); ++k) same = back.vertices[k] == mesh.vertices[k];
  const MeshTopology tb = mesh_topology(back);
  const bool ok = t.euler_characteristic == 0 && t.closed && t.consistently_oriented && seam == 0.0 && same &&
                  tb.closed && tb.euler_characteristic == 0 &&
                  t.vertices == static_cast<long>(g.n_r() + (g.n_r() - 2)) * g.n_theta();
  report(9, ok, fmt("m=%d: V=%ld E=%ld F=%ld chi=%ld closed=%d oriented=%d, seam gap before weld %.1e, after %.1e, "
                    "OBJ round-trip %s",
                    run.m, t.vertices, t.edges, t.faces, t.euler_characteristic, t.closed, t.consistently_oriented,
                    seam_gap(u), seam, same ? "exact" : "differs"));
}

nlohmann::json load_without_timings(const fs::path& p) {
  std::ifstream is(p);
  nlohmann::json j = nlohmann::json::parse(is);
  j.erase("timings");
  return j;
}

void criterion_determinism(const std::string& cli, const fs::path& dir) {
  std::vector<nlohmann::json> reports;
  std::vector<std::string> meshes;
  int status = 0;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / fmt("run%d.json", k);
    const fs::path mesh = dir / fmt("run%d.obj", k);
    const std::string cmd = "\"" + cli + "\" solve --r0 0.5 --m 7 --nr 48 --ntheta 112 --tol 1e-8 --seed 5 --out \"" +
                            out.string() + "\" --mesh \"" + mesh.string() + "\"";
    status |= std::system(cmd.c_str());
    reports.push_back(load_without_timings(out));
    std::ifstream is(mesh);
    meshes.emplace_back(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
    // Artifacts are named per run; compare the rest.
    reports.back().erase("artifacts");
  }
  const bool ok = status == 0 && reports[0] == reports[1] && meshes[0] == meshes[1];
  report(10, ok, fmt("two CLI runs: exit %d, reports %s, meshes %s", status,
                     reports[0] == reports[1] ? "identical" : "differ", meshes[0] == meshes[1] ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path to hsys>\n", argv[0]);
    return 2;
  }
  const fs::path dir = fs::temp_directory_path() / "hsys_acceptance";
  fs::create_directories(dir);
  auto guard = [](int id, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  };
  guard(1, criterion_poisson);
  guard(2, criterion_bracket);
  guard(3, criterion_exchange_identity);
  guard(4, criterion_energy);
  guard(5, criterion_gradient);
  std::vector<Run> runs;
  guard(6, [&] {
    runs.push_back(run_minimization(5));
    runs.push_back(run_minimization(7));
    criterion_minimize(runs);
  });
  const bool have_runs = runs.size() == 2;
  if (have_runs) {
    guard(7, [&] { criterion_certificate(runs); });
  } else {
    report(7, false, "minimization runs did not complete");
  }
  guard(8, criterion_threshold);
  if (have_runs) {
    guard(9, [&] { criterion_surface(runs[1], dir); });
  } else {
    report(9, false, "minimization runs did not complete");
  }
  guard(10, [&] { criterion_determinism(argv[1], dir); });
  fs::remove_all(dir);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
