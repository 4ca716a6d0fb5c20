#include "cavrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace cavrec {

Eigen::AlignedBox3d TriangleMesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

double TriangleMesh::extent() const {
  if (vertices.empty()) return 0.0;
  return bounds().diagonal().norm();
}

double TriangleMesh::surface_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

double TriangleMesh::signed_volume() const {
  double vol = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return vol;
}

Vec3 TriangleMesh::triangle_normal(std::uint32_t t) const {
  const auto& tri = triangles[t];
  const Vec3 n = (vertices[tri[1]] - vertices[tri[0]])
                     .cross(vertices[tri[2]] - vertices[tri[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

TriangleMesh transformed(const TriangleMesh& mesh,
                         const SimilarityTransform& t) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = t.apply(v);
  return out;
}

namespace {

struct EdgeKey {
  std::uint32_t a, b;  // a < b
  bool operator==(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const {
    return std::hash<std::uint64_t>()((std::uint64_t(e.a) << 32) | e.b);
  }
};

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

}  // namespace

WatertightReport check_watertight(const TriangleMesh& mesh) {
  std::unordered_map<EdgeKey, int, EdgeKeyHash> incidence;
  incidence.reserve(mesh.triangles.size() * 3);
  UnionFind uf(mesh.vertices.size());
  std::vector<bool> referenced(mesh.vertices.size(), false);

  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const std::uint32_t u = t[i];
      const std::uint32_t v = t[(i + 1) % 3];
      incidence[{std::min(u, v), std::max(u, v)}] += 1;
      uf.unite(u, v);
      referenced[u] = true;
    }
  }

  WatertightReport report;
  for (const auto& [edge, count] : incidence) {
    if (count == 1) ++report.boundary_edge_count;
    if (count >= 3) ++report.non_manifold_edge_count;
  }
  std::vector<bool> seen(mesh.vertices.size(), false);
  for (std::uint32_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!referenced[v]) continue;
    const std::uint32_t root = uf.find(v);
    if (!seen[root]) {
      seen[root] = true;
      ++report.connected_component_count;
    }
  }
  report.is_watertight = report.boundary_edge_count == 0 &&
                         report.non_manifold_edge_count == 0;
  return report;
}

std::vector<Vec3> sample_surface_points(const TriangleMesh& mesh,
                                        std::size_t n_points,
                                        std::uint64_t seed) {
  if (mesh.empty()) throw EmptyMesh("sample_surface_points: empty mesh");

  std::vector<double> cdf(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    total += 0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                       .norm();
    cdf[i] = total;
  }
  if (total <= 0.0)
    throw DegenerateMesh("sample_surface_points: zero total area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> samples;
  samples.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double pick = unit(rng) * total;
    const std::size_t tri_idx = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    const auto& t = mesh.triangles[std::min(tri_idx, cdf.size() - 1)];
    double r1 = std::sqrt(unit(rng));
    double r2 = unit(rng);
    const Vec3 p = (1.0 - r1) * mesh.vertices[t[0]] +
                   r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                   r1 * r2 * mesh.vertices[t[2]];
    samples.push_back(p);
  }
  return samples;
}

}  // namespace cavrec
