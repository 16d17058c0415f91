#pragma once

// The doubled closed surface: the annulus sheet u = (lambda a, lambda b,
// lambda^2 phi) glued along both circles to an oppositely oriented copy
// carrying (lambda a, lambda b, -lambda^2 phi). Both circles are welded, so the
// result is a closed mesh of torus type.

#include "hsys/verification.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hsys {

enum class VertexTag : std::uint8_t { original, mirrored, seam };

struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  /// 0-based vertex indices; quads from the polar grid, or triangles.
  std::vector<std::vector<int>> faces;
  /// One tag per vertex; may be empty for meshes read from disk.
  std::vector<VertexTag> provenance;

  bool empty() const { return vertices.empty() || faces.empty(); }
};

struct MeshTopology {
  long vertices = 0;
  long edges = 0;
  long faces = 0;
  long euler_characteristic = 0;
  /// Every undirected edge lies in exactly two faces.
  bool closed = false;
  /// Every directed edge occurs at most once (consistent winding).
  bool consistently_oriented = false;
  /// Triangles (quads fan-split) summed as v0 . (v1 x v2) / 6.
  double signed_volume = 0.0;
};

/// u = (lambda a, lambda b, lambda^2 phi) at the nodes.
MapTriple assemble_map(const Solution& sol);

/// Largest distance between the two sheets along the circles before welding,
/// i.e. 2 max |u3| on the boundary.
double seam_gap(const MapTriple& u);

/// Throws SeamGap when seam_gap(u) > tolerance * max(1, max |u|).
SurfaceMesh double_surface(const MapTriple& u, double tolerance = 1e-10);
SurfaceMesh double_surface(const Solution& sol, double tolerance = 1e-10);

MeshTopology mesh_topology(const SurfaceMesh& mesh);

/// Splits every quad (v0 v1 v2 v3) into (v0 v1 v2), (v0 v2 v3).
SurfaceMesh triangulated(const SurfaceMesh& mesh);

/// Wavefront OBJ: "v x y z" lines with 17 significant digits, then "f ..."
/// with 1-based indices. Throws InvalidArgument for an empty mesh (nothing is
/// written) and Error on I/O failure.
void export_obj(const SurfaceMesh& mesh, const std::filesystem::path& path,
                bool triangulate = false);
/// Reads v and f records; other records are skipped. Throws FormatError.
SurfaceMesh read_obj(const std::filesystem::path& path);

/// Binary little-endian PLY with double vertices and int face lists.
void export_ply(const SurfaceMesh& mesh, const std::filesystem::path& path,
                bool triangulate = false);

}  // namespace hsys
