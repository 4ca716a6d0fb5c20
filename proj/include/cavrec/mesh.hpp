#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cavrec/geometry.hpp"

namespace cavrec {

// Indexed triangle mesh with optional per-vertex color. Triangles wind
// counter-clockwise when seen from the positive side of the field they
// were extracted from (the observed, empty-space side).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint8_t, 3>> colors;  // empty, or one per vertex
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool has_colors() const { return !colors.empty(); }
  bool empty() const { return triangles.empty(); }

  Eigen::AlignedBox3d bounds() const;
  // Bounding-box diagonal; 0 for an empty mesh.
  double extent() const;
  double surface_area() const;
  // Divergence-theorem volume; positive when wound outward.
  double signed_volume() const;
  // Unit normal of triangle t (right-hand rule over the winding).
  Vec3 triangle_normal(std::uint32_t t) const;
};

TriangleMesh transformed(const TriangleMesh& mesh, const SimilarityTransform& t);

struct WatertightReport {
  std::int64_t boundary_edge_count = 0;      // edges with exactly 1 incident face
  std::int64_t non_manifold_edge_count = 0;  // edges with 3+ incident faces
  std::int64_t connected_component_count = 0;
  bool is_watertight = false;
};

// Classifies every undirected edge by the number of incident triangles.
WatertightReport check_watertight(const TriangleMesh& mesh);

// Uniform area-weighted surface samples; deterministic for a fixed seed.
std::vector<Vec3> sample_surface_points(const TriangleMesh& mesh,
                                        std::size_t n_points,
                                        std::uint64_t seed);

}  // namespace cavrec
