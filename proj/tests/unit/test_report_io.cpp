#include "hsys/errors.hpp"
#include "hsys/report_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>

using namespace hsys;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hsys_report_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Base64, RoundTripBitwise) {
  Eigen::MatrixXd m(3, 4);
  m << 1.0, -0.0, 1e-300, std::numeric_limits<double>::denorm_min(), 3.141592653589793, -2.5, 1e300, 7,
      0.1, 0.2, 0.3, 0.4;
  const std::string text = encode_doubles(m);
  EXPECT_EQ(text.size(), 4 * ((12 * 8 + 2) / 3));
  const Eigen::MatrixXd back = decode_doubles(text, 3, 4);
  EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(double) * 12), 0);
}

TEST(Base64, RowMajorLittleEndianLayout) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  // 1.0 = 00 00 00 00 00 00 f0 3f, 2.0 = ... 00 40
  EXPECT_EQ(encode_doubles(m).substr(0, 16), "AAAAAAAA8D8AAAAA");
}

TEST(Base64, RejectsBadPayloads) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 3);
  const std::string text = encode_doubles(m);
  EXPECT_THROW(decode_doubles(text.substr(0, text.size() - 8), 2, 3), FormatError);
  EXPECT_THROW(decode_doubles(text, 3, 3), FormatError);
  EXPECT_THROW(decode_doubles("@@@@", 1, 1), FormatError);
}

TEST(SolutionFile, RoundTrip) {
  TempDir dir;
  const GridPtr g = build_grid({0.4, 12, 18});
  const FieldPair p = identity_pair(g) + 0.2 * random_equivariant(g, SymmetryOrder(3), 5);
  const EnergyEval e = evaluate(p);
  const fs::path file = dir.path / "sol.json";
  write_solution(file, p, SymmetryOrder(3), e);
  const SolutionFile s = read_solution(file);
  EXPECT_EQ(s.grid, g->spec());
  EXPECT_EQ(s.m, 3);
  EXPECT_EQ(s.lambda, e.lambda);
  EXPECT_EQ(s.energy, e.value);
  EXPECT_EQ(s.pair.a.values(), p.a.values());
  EXPECT_EQ(s.pair.b.values(), p.b.values());
  EXPECT_EQ(evaluate(s.pair).value, e.value);
}

TEST(SolutionFile, MalformedInputs) {
  TempDir dir;
  const GridPtr g = build_grid({0.5, 8, 12});
  const FieldPair p = identity_pair(g);
  const fs::path file = dir.path / "sol.json";
  write_solution(file, p, SymmetryOrder(3), evaluate(p));
  std::string text;
  {
    std::ifstream is(file);
    text.assign(std::istreambuf_iterator<char>(is), {});
  }
  auto write = [&](const std::string& name, const std::string& body) {
    const fs::path f = dir.path / name;
    std::ofstream(f) << body;
    return f;
  };
  EXPECT_THROW(read_solution(write("trunc.json", text.substr(0, text.size() / 2))), FormatError);
  nlohmann::json j = nlohmann::json::parse(text);
  j["format"] = "other/1";
  EXPECT_THROW(read_solution(write("tag.json", j.dump())), FormatError);
  j = nlohmann::json::parse(text);
  j["m"] = 5;
  EXPECT_THROW(read_solution(write("m.json", j.dump())), FormatError);
  j = nlohmann::json::parse(text);
  j["grid"]["n_r"] = 9;
  EXPECT_THROW(read_solution(write("nr.json", j.dump())), FormatError);
  j = nlohmann::json::parse(text);
  j.erase("b");
  EXPECT_THROW(read_solution(write("nob.json", j.dump())), FormatError);
  Eigen::MatrixXd bad = p.a.values();
  bad(1, 1) = std::numeric_limits<double>::infinity();
  j = nlohmann::json::parse(text);
  j["a"] = encode_doubles(bad);
  EXPECT_THROW(read_solution(write("inf.json", j.dump())), FormatError);
  EXPECT_THROW(read_solution(dir.path / "missing.json"), Error);
}

TEST(Reports, TraceSummaryDecimates) {
  MinimizeConfig cfg;
  cfg.grid = {0.5, 16, 28};
  cfg.m = 7;
  cfg.max_iters = 40;
  cfg.grad_tol = 1e-30;
  const Solution sol = minimize(cfg);
  const auto t = trace_summary(sol, 7);
  EXPECT_EQ(t["iterations"].get<std::size_t>(), sol.trace.records.size());
  EXPECT_LE(t["history"].size(), 8u);
  EXPECT_EQ(t["history"].back()["iteration"].get<int>(), sol.trace.records.back().iteration);
  EXPECT_EQ(t["converged"].get<bool>(), false);
  const auto full = trace_summary(sol, 1000);
  EXPECT_EQ(full["history"].size(), sol.trace.records.size());
}

TEST(Reports, JsonFieldsMirrorStructs) {
  const GridPtr g = build_grid({0.5, 16, 16});
  const FieldPair p = identity_pair(g);
  const EnergyEval e = evaluate(p);
  const auto je = to_json(e);
  EXPECT_EQ(je["value"].get<double>(), e.value);
  EXPECT_FALSE(je.contains("phi"));
  const CertificateReport c = certify(p, e, SymmetryOrder(2));
  const auto jc = to_json(c);
  EXPECT_EQ(jc["passed"].get<bool>(), c.passed);
  EXPECT_EQ(jc["scheme_error"]["value"].get<double>(), c.scheme.value());
  EXPECT_EQ(jc["hopf"]["tau"]["re"].get<double>(), c.hopf.tau.real());
  EXPECT_EQ(to_json(g->spec())["n_theta"].get<int>(), 16);
}
