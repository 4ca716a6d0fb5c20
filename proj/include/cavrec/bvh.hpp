#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cavrec/mesh.hpp"

namespace cavrec {

// Closest point on triangle (a,b,c) to p; face, edge and vertex regions.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

// Axis-aligned bounding-volume hierarchy over the triangles of one mesh.
// Immutable after construction; concurrent queries are safe.
class MeshBvh {
 public:
  // Copies triangle geometry out of the mesh. Throws EmptyMesh.
  explicit MeshBvh(const TriangleMesh& mesh);

  struct ClosestHit {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 point = Vec3::Zero();
    std::uint32_t triangle = 0;
  };
  ClosestHit closest(const Vec3& query) const;

  struct RayHit {
    double t = 0.0;  // ray parameter in units of |dir|
    std::uint32_t triangle = 0;
  };
  // Nearest intersection with t in (t_min, t_max); dir need not be unit.
  std::optional<RayHit> raycast(
      const Vec3& origin, const Vec3& dir, double t_min = 1e-12,
      double t_max = std::numeric_limits<double>::infinity()) const;

  std::size_t triangle_count() const { return tri_a_.size(); }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::int32_t left = -1;    // child node, or -1 for leaves
    std::int32_t right = -1;
    std::uint32_t begin = 0;   // triangle range for leaves
    std::uint32_t count = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;  // permutation into original triangle ids
  std::vector<Vec3> tri_a_, tri_b_, tri_c_;
};

}  // namespace cavrec
