#include "hsys/surface_io.hpp"

#include "hsys/errors.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace hsys {

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

template <class T>
void put_le(std::ostream& os, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

MapTriple assemble_map(const Solution& sol) { return lift_map(sol.pair, sol.eval); }

double seam_gap(const MapTriple& u) {
  const AnnulusGrid& g = u.u3.grid();
  double gap = 0.0;
  for (const auto& ring : g.boundary())
    gap = std::max(gap, 2.0 * u.u3.values().row(ring.radial_index).cwiseAbs().maxCoeff());
  return gap;
}

SurfaceMesh double_surface(const MapTriple& u, double tolerance) {
  const AnnulusGrid& g = u.u1.grid();
  const int nr = g.n_r();
  const int nt = g.n_theta();
  const double scale =
      std::max({1.0, u.u1.max_abs(), u.u2.max_abs(), u.u3.max_abs()});
  const double gap = seam_gap(u);
  if (gap > tolerance * scale) {
    std::ostringstream msg;
    msg << "sheets do not meet on the boundary: seam gap " << gap;
    throw SeamGap(msg.str(), gap);
  }

  SurfaceMesh mesh;
  const int n_orig = nr * nt;
  const int n_mirror = (nr - 2) * nt;
  mesh.vertices.reserve(n_orig + n_mirror);
  mesh.provenance.reserve(n_orig + n_mirror);
  auto orig = [&](int i, int j) { return i * nt + (j % nt); };
  auto mirror = [&](int i, int j) {
    if (i == 0 || i == nr - 1) return orig(i, j);
    return n_orig + (i - 1) * nt + (j % nt);
  };

  for (int i = 0; i < nr; ++i) {
    const bool seam = i == 0 || i == nr - 1;
    for (int j = 0; j < nt; ++j) {
      // Welded seam vertices sit halfway between the sheets.
      const double z = seam ? 0.0 : u.u3(i, j);
      mesh.vertices.emplace_back(u.u1(i, j), u.u2(i, j), z);
      mesh.provenance.push_back(seam ? VertexTag::seam : VertexTag::original);
    }
  }
  for (int i = 1; i < nr - 1; ++i) {
    for (int j = 0; j < nt; ++j) {
      mesh.vertices.emplace_back(u.u1(i, j), u.u2(i, j), -u.u3(i, j));
      mesh.provenance.push_back(VertexTag::mirrored);
    }
  }

  mesh.faces.reserve(2 * (nr - 1) * nt);
  for (int i = 0; i + 1 < nr; ++i)
    for (int j = 0; j < nt; ++j)
      mesh.faces.push_back({orig(i, j), orig(i + 1, j), orig(i + 1, j + 1), orig(i, j + 1)});
  // Opposite orientation on the copy.
  for (int i = 0; i + 1 < nr; ++i)
    for (int j = 0; j < nt; ++j)
      mesh.faces.push_back({mirror(i, j), mirror(i, j + 1), mirror(i + 1, j + 1), mirror(i + 1, j)});
  return mesh;
}

SurfaceMesh double_surface(const Solution& sol, double tolerance) {
  return double_surface(assemble_map(sol), tolerance);
}

MeshTopology mesh_topology(const SurfaceMesh& mesh) {
  MeshTopology t;
  t.vertices = static_cast<long>(mesh.vertices.size());
  t.faces = static_cast<long>(mesh.faces.size());
  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_set<std::uint64_t> directed;
  bool oriented = true;
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    const int n = static_cast<int>(f.size());
    for (int k = 0; k < n; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % n];
      ++undirected[edge_key(std::min(a, b), std::max(a, b))];
      if (!directed.insert(edge_key(a, b)).second) oriented = false;
    }
    const Eigen::Vector3d& v0 = mesh.vertices[f[0]];
    for (int k = 1; k + 1 < n; ++k)
      vol += v0.dot(mesh.vertices[f[k]].cross(mesh.vertices[f[k + 1]])) / 6.0;
  }
  t.edges = static_cast<long>(undirected.size());
  t.euler_characteristic = t.vertices - t.edges + t.faces;
  t.closed = !undirected.empty() &&
             std::all_of(undirected.begin(), undirected.end(), [](const auto& e) { return e.second == 2; });
  t.consistently_oriented = oriented;
  t.signed_volume = vol;
  return t;
}

SurfaceMesh triangulated(const SurfaceMesh& mesh) {
  SurfaceMesh out;
  out.vertices = mesh.vertices;
  out.provenance = mesh.provenance;
  for (const auto& f : mesh.faces)
    for (std::size_t k = 1; k + 1 < f.size(); ++k) out.faces.push_back({f[0], f[k], f[k + 1]});
  return out;
}

void export_obj(const SurfaceMesh& mesh, const std::filesystem::path& path, bool triangulate) {
  if (mesh.empty()) throw InvalidArgument("refusing to export an empty mesh");
  const SurfaceMesh& m = triangulate ? triangulated(mesh) : mesh;
  std::string text;
  text.reserve(m.vertices.size() * 64 + m.faces.size() * 32);
  for (const auto& v : m.vertices) {
    text += "v ";
    append_number(text, v.x());
    text += ' ';
    append_number(text, v.y());
    text += ' ';
    append_number(text, v.z());
    text += '\n';
  }
  for (const auto& f : m.faces) {
    text += 'f';
    for (int idx : f) {
      text += ' ';
      text += std::to_string(idx + 1);
    }
    text += '\n';
  }
  std::ofstream os = open_for_write(path);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error("write failed: " + path.string());
}

SurfaceMesh read_obj(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  SurfaceMesh mesh;
  std::string line;
  long lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::string tok;
      double xyz[3];
      for (double& c : xyz) {
        if (!(ls >> tok)) fail("vertex needs three coordinates");
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), c);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("bad number '" + tok + "'");
      }
      mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (res.ec != std::errc() || res.ptr != head.data() + head.size() || idx == 0)
          fail("bad face index '" + tok + "'");
        const long nv = static_cast<long>(mesh.vertices.size());
        const long zero_based = idx > 0 ? idx - 1 : nv + idx;
        if (zero_based < 0 || zero_based >= nv) fail("face index out of range");
        face.push_back(static_cast<int>(zero_based));
      }
      if (face.size() < 3) fail("face needs at least three vertices");
      mesh.faces.push_back(std::move(face));
    }
  }
  return mesh;
}

void export_ply(const SurfaceMesh& mesh, const std::filesystem::path& path, bool triangulate) {
  if (mesh.empty()) throw InvalidArgument("refusing to export an empty mesh");
  const SurfaceMesh& m = triangulate ? triangulated(mesh) : mesh;
  std::ofstream os = open_for_write(path);
  os << "ply\nformat binary_little_endian 1.0\n"
     << "element vertex " << m.vertices.size() << "\n"
     << "property double x\nproperty double y\nproperty double z\n"
     << "element face " << m.faces.size() << "\n"
     << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : m.vertices) {
    put_le(os, v.x());
    put_le(os, v.y());
    put_le(os, v.z());
  }
  for (const auto& f : m.faces) {
    put_le(os, static_cast<std::uint8_t>(f.size()));
    for (int idx : f) put_le(os, static_cast<std::int32_t>(idx));
  }
  if (!os) throw Error("write failed: " + path.string());
}

}  // namespace hsys
