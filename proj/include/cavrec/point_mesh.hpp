#pragma once

#include <span>
#include <vector>

#include "cavrec/bvh.hpp"
#include "cavrec/mesh.hpp"

namespace cavrec {

struct DistanceStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double median = 0.0;
  double max = 0.0;
  std::vector<double> per_point;
};

DistanceStats summarize_distances(std::vector<double> distances);

// Euclidean distance from each point to its closest point on the mesh.
// Throws EmptyMesh. The BVH overload reuses a prebuilt tree.
DistanceStats point_to_mesh(std::span<const Vec3> points,
                            const TriangleMesh& mesh);
DistanceStats point_to_mesh(std::span<const Vec3> points, const MeshBvh& bvh);

}  // namespace cavrec
