#include "hsys/report_io.hpp"

#include "hsys/errors.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hsys {

using nlohmann::json;

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

json to_json(const GridSpec& spec) {
  return json{{"r0", spec.r0}, {"n_r", spec.n_r}, {"n_theta", spec.n_theta}};
}

json to_json(const MinimizeConfig& cfg) {
  return json{{"grid", to_json(cfg.grid)},
              {"m", cfg.m},
              {"max_iters", cfg.max_iters},
              {"grad_tol", cfg.grad_tol},
              {"step",
               {{"initial_step", cfg.step.initial_step},
                {"backtrack", cfg.step.backtrack},
                {"growth", cfg.step.growth},
                {"min_step", cfg.step.min_step},
                {"armijo", cfg.step.armijo}}},
              {"seed", cfg.seed},
              {"init", to_string(cfg.init)},
              {"perturbation", cfg.perturbation},
              {"decay", cfg.decay},
              {"concentration_cells", cfg.concentration_cells}};
}

json to_json(const EnergyEval& e) {
  return json{{"value", e.value},
              {"grad_a_sq", e.grad_a_sq},
              {"grad_b_sq", e.grad_b_sq},
              {"grad_phi_norm", e.grad_phi_norm},
              {"lambda", e.lambda}};
}

json trace_summary(const Solution& sol, std::size_t max_points) {
  const auto& recs = sol.trace.records;
  json history = json::array();
  const std::size_t n = recs.size();
  const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / std::max<std::size_t>(1, max_points));
  for (std::size_t k = 0; k < n; ++k) {
    if (k % stride != 0 && k + 1 != n) continue;
    const TraceRecord& r = recs[k];
    history.push_back({{"iteration", r.iteration},
                       {"energy", r.energy},
                       {"grad_norm", r.grad_norm},
                       {"step", r.step},
                       {"concentration", r.concentration}});
  }
  return json{{"iterations", n},
              {"final_grad_norm", sol.grad_norm},
              {"converged", sol.converged},
              {"stop_reason", to_string(sol.stop)},
              {"history", history}};
}

json to_json(const ConcentrationReport& c) {
  return json{{"cell_fraction_nu", c.cell_fraction_nu},
              {"cell_fraction_mu", c.cell_fraction_mu},
              {"cells", c.cells},
              {"cell_dr", c.cell_dr},
              {"cell_dtheta", c.cell_dtheta}};
}

json to_json(const CertificateReport& c) {
  const CertificateChecks& k = c.checks;
  return json{
      {"energy", c.energy},
      {"lambda", c.lambda},
      {"el_residual_interior", c.el_residual_interior},
      {"h_system_literal", c.h_system_literal},
      {"bc_phi", c.bc_phi},
      {"bc_neumann_a", c.bc_neumann_a},
      {"bc_neumann_b", c.bc_neumann_b},
      {"grad_orthogonality", c.grad_orthogonality},
      {"norm_balance", c.norm_balance},
      {"mean_a", c.mean_a},
      {"mean_b", c.mean_b},
      {"means_apply", c.means_apply},
      {"hopf",
       {{"tau", complex_json(c.hopf.tau)},
        {"fit_residual", c.hopf.fit_residual},
        {"imag_fraction", c.hopf.imag_fraction}}},
      {"conformal_defect",
       {{"real_part", c.conformal.real_part},
        {"imag_part", c.conformal.imag_part},
        {"combined", c.conformal.combined},
        {"normalized", c.conformal.normalized},
        {"hopf_l2", c.conformal.hopf_l2}}},
      {"hopf_relation", c.hopf_relation},
      {"lambda_bookkeeping", c.lambda_bookkeeping},
      {"scheme_error",
       {{"laplacian", c.scheme.laplacian},
        {"bracket", c.scheme.bracket},
        {"poisson", c.scheme.poisson},
        {"spectral_tail", c.scheme.spectral_tail},
        {"value", c.scheme.value()}}},
      {"tolerances",
       {{"el_residual", c.tolerances.el()},
        {"boundary", c.tolerances.boundary()},
        {"balance", c.tolerances.balance},
        {"mean", c.tolerances.mean},
        {"hopf_residual", c.tolerances.hopf_residual},
        {"imag_fraction", c.tolerances.imag_fraction},
        {"hopf_relation", c.tolerances.hopf_relation},
        {"lambda_bookkeeping", c.tolerances.lambda_bookkeeping}}},
      {"checks",
       {{"el_residual", k.el_residual},
        {"bc_phi", k.bc_phi},
        {"bc_neumann", k.bc_neumann},
        {"grad_orthogonality", k.grad_orthogonality},
        {"norm_balance", k.norm_balance},
        {"means", k.means},
        {"hopf_residual", k.hopf_residual},
        {"hopf_real", k.hopf_real},
        {"hopf_relation", k.hopf_relation},
        {"lambda_bookkeeping", k.lambda_bookkeeping}}},
      {"passed", c.passed}};
}

json to_json(const ThresholdReport& t) {
  return json{{"e_xy", t.e_xy},
              {"g_hat", t.g_hat},
              {"m", t.m},
              {"sqrt_m_times_g_hat", t.sqrt_m_times_g_hat},
              {"condition_met", t.condition_met},
              {"smallest_sufficient_m", t.smallest_sufficient_m},
              {"g_hat_converged", t.g_hat_converged},
              {"g_hat_iterations", t.g_hat_iterations}};
}

json to_json(const MeshTopology& t) {
  return json{{"vertices", t.vertices},
              {"edges", t.edges},
              {"faces", t.faces},
              {"euler_characteristic", t.euler_characteristic},
              {"closed", t.closed},
              {"consistently_oriented", t.consistently_oriented},
              {"signed_volume", t.signed_volume}};
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw Error("write failed: " + path.string());
}

std::string encode_doubles(const Eigen::MatrixXd& values) {
  const RowMajor rm = values;
  std::vector<unsigned char> bytes(static_cast<std::size_t>(rm.size()) * 8);
  for (Eigen::Index k = 0; k < rm.size(); ++k) {
    unsigned char* dst = bytes.data() + 8 * k;
    std::memcpy(dst, rm.data() + k, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(dst, dst + 8);
  }
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

Eigen::MatrixXd decode_doubles(const std::string& text, int n_r, int n_theta) {
  const std::size_t want = static_cast<std::size_t>(n_r) * n_theta * 8;
  std::vector<unsigned char> bytes(want + 3);
  std::size_t got = 0;
  const char* end = nullptr;
  if (sodium_base642bin(bytes.data(), bytes.size(), text.data(), text.size(), nullptr, &got, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size())
    throw FormatError("payload is not valid base64");
  if (got != want)
    throw FormatError("payload holds " + std::to_string(got) + " bytes, expected " +
                      std::to_string(want));
  RowMajor rm(n_r, n_theta);
  for (Eigen::Index k = 0; k < rm.size(); ++k) {
    unsigned char* src = bytes.data() + 8 * k;
    if constexpr (std::endian::native == std::endian::big) std::reverse(src, src + 8);
    std::memcpy(rm.data() + k, src, 8);
  }
  return rm;
}

void write_solution(const std::filesystem::path& path, const FieldPair& p, SymmetryOrder m,
                    const EnergyEval& e) {
  const json j{{"format", kSolutionFormat},
               {"grid", to_json(p.grid().spec())},
               {"m", m.value()},
               {"lambda", e.lambda},
               {"energy", e.value},
               {"layout", "float64 little-endian, r-major (i * n_theta + j), base64"},
               {"a", encode_doubles(p.a.values())},
               {"b", encode_doubles(p.b.values())}};
  write_json(j, path);
}

SolutionFile read_solution(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
  try {
    if (j.at("format").get<std::string>() != kSolutionFormat)
      throw FormatError(path.string() + ": unknown format tag");
    GridSpec spec;
    spec.r0 = j.at("grid").at("r0").get<double>();
    spec.n_r = j.at("grid").at("n_r").get<int>();
    spec.n_theta = j.at("grid").at("n_theta").get<int>();
    spec.validate();
    const int m = j.at("m").get<int>();
    SymmetryOrder order(m);
    const GridPtr grid = build_grid(spec);
    order.grid_steps(*grid);
    Eigen::MatrixXd a = decode_doubles(j.at("a").get<std::string>(), spec.n_r, spec.n_theta);
    Eigen::MatrixXd b = decode_doubles(j.at("b").get<std::string>(), spec.n_r, spec.n_theta);
    if (!a.allFinite() || !b.allFinite()) throw FormatError(path.string() + ": non-finite values");
    return SolutionFile{spec, m, j.at("lambda").get<double>(), j.at("energy").get<double>(),
                        FieldPair(ScalarField(grid, std::move(a)), ScalarField(grid, std::move(b)))};
  } catch (const json::exception& err) {
    throw FormatError(path.string() + ": " + err.what());
  } catch (const InvalidArgument& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

}  // namespace hsys
