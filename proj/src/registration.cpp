#include "cavrec/registration.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace cavrec {

namespace {

SimilarityTransform similarity_from_matrix(const Eigen::Matrix4d& m) {
  SimilarityTransform t;
  const Eigen::Matrix3d a = m.topLeftCorner<3, 3>();
  t.scale = std::cbrt(a.determinant());
  t.rotation = Quat(Eigen::Matrix3d(a / t.scale)).normalized();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

}  // namespace

RegistrationResult register_sim3(std::span<const Vec3> source,
                                 const TriangleMesh& target,
                                 const SimilarityTransform& init,
                                 const RegistrationConfig& cfg) {
  if (source.size() < 7)
    throw TooFewPoints("register_sim3: need at least 7 source points");
  if (target.empty()) throw EmptyMesh("register_sim3: empty target mesh");

  const MeshBvh bvh(target);
  const double tol = cfg.tol >= 0.0 ? cfg.tol : 1e-7 * target.extent();
  const std::size_t n = source.size();
  const std::size_t keep = std::max<std::size_t>(
      3, static_cast<std::size_t>(
             std::llround((1.0 - cfg.trim_fraction) * static_cast<double>(n))));

  RegistrationResult result;
  result.transform = init;

  std::vector<Vec3> closest(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  Eigen::Matrix3Xd src_kept(3, keep), dst_kept(3, keep);

  double prev_mean = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    result.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto hit = bvh.closest(result.transform.apply(source[i]));
      closest[i] = hit.point;
      dist[i] = hit.distance;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return dist[a] < dist[b];
                     });

    double mean = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t p = order[i];
      src_kept.col(i) = source[p];
      dst_kept.col(i) = closest[p];
      mean += dist[p];
    }
    mean /= static_cast<double>(keep);
    result.trimmed_mean = mean;

    if (std::abs(prev_mean - mean) < tol) {
      result.converged = true;
      break;
    }
    prev_mean = mean;

    // Absolute re-fit from the original points keeps the estimate from
    // accumulating compose error.
    result.transform =
        similarity_from_matrix(Eigen::umeyama(src_kept, dst_kept, true));
  }

  std::vector<Vec3> moved(n);
  for (std::size_t i = 0; i < n; ++i)
    moved[i] = result.transform.apply(source[i]);
  result.residuals = point_to_mesh(moved, bvh);
  return result;
}

SimilarityTransform coarse_init(std::span<const Vec3> source,
                                const TriangleMesh& target) {
  if (source.empty()) throw TooFewPoints("coarse_init: no source points");
  if (target.vertices.empty()) throw EmptyMesh("coarse_init: empty target");

  const auto centroid_rms = [](std::span<const Vec3> pts) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    double rms = 0.0;
    for (const Vec3& p : pts) rms += (p - c).squaredNorm();
    rms = std::sqrt(rms / static_cast<double>(pts.size()));
    return std::pair<Vec3, double>(c, rms);
  };

  const auto [src_c, src_r] = centroid_rms(source);
  const auto [dst_c, dst_r] = centroid_rms(target.vertices);

  SimilarityTransform t;
  t.scale = src_r > 0.0 && dst_r > 0.0 ? dst_r / src_r : 1.0;
  t.translation = dst_c - t.scale * src_c;
  return t;
}

}  // namespace cavrec
