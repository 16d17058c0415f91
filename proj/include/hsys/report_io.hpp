#pragma once

// JSON run reports and the solution file format.
//
// Solution file: a JSON object with the grid, m, lambda and E, and the nodal
// values of a and b as base64 of little-endian float64 in r-major order
// (index i * n_theta + j, i radial). phi is never stored; readers recompute it.

#include "hsys/surface_io.hpp"
#include "hsys/verification.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace hsys {

inline constexpr const char* kReportSchemaId = "hsys-run-report/1";
inline constexpr const char* kSolutionFormat = "hsys-solution/1";

nlohmann::json to_json(const GridSpec& spec);
nlohmann::json to_json(const MinimizeConfig& cfg);
/// Scalars only (phi is omitted).
nlohmann::json to_json(const EnergyEval& e);
/// Iteration count, final gradient norm and at most max_points records
/// spread evenly over the run (the last one always included).
nlohmann::json trace_summary(const Solution& sol, std::size_t max_points = 200);
nlohmann::json to_json(const ConcentrationReport& c);
nlohmann::json to_json(const CertificateReport& c);
nlohmann::json to_json(const ThresholdReport& t);
nlohmann::json to_json(const MeshTopology& t);

/// Writes the JSON with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

struct SolutionFile {
  GridSpec grid;
  int m = 1;
  double lambda = 0.0;
  double energy = 0.0;
  FieldPair pair;
};

void write_solution(const std::filesystem::path& path, const FieldPair& p, SymmetryOrder m,
                    const EnergyEval& e);
/// Throws FormatError for malformed, truncated or inconsistent files.
SolutionFile read_solution(const std::filesystem::path& path);

std::string encode_doubles(const Eigen::MatrixXd& values);
/// Inverse of encode_doubles for an n_r x n_theta array.
Eigen::MatrixXd decode_doubles(const std::string& text, int n_r, int n_theta);

}  // namespace hsys
