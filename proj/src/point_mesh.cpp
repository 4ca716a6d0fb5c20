#include "cavrec/point_mesh.hpp"

#include <algorithm>
#include <cmath>

namespace cavrec {

DistanceStats summarize_distances(std::vector<double> distances) {
  DistanceStats stats;
  if (distances.empty()) return stats;
  const double n = static_cast<double>(distances.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double d : distances) {
    sum += d;
    sum_sq += d * d;
    stats.max = std::max(stats.max, d);
  }
  stats.mean = sum / n;
  stats.stddev = std::sqrt(std::max(0.0, sum_sq / n - stats.mean * stats.mean));

  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1
                     ? sorted[mid]
                     : 0.5 * (sorted[mid - 1] + sorted[mid]);
  stats.per_point = std::move(distances);
  return stats;
}

DistanceStats point_to_mesh(std::span<const Vec3> points,
                            const TriangleMesh& mesh) {
  return point_to_mesh(points, MeshBvh(mesh));
}

DistanceStats point_to_mesh(std::span<const Vec3> points, const MeshBvh& bvh) {
  std::vector<double> distances;
  distances.reserve(points.size());
  for (const Vec3& p : points) distances.push_back(bvh.closest(p).distance);
  return summarize_distances(std::move(distances));
}

}  // namespace cavrec
