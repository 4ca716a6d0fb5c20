#include "cavrec/render.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cavrec/parallel.hpp"
#include "cavrec/rng.hpp"

namespace cavrec {

std::array<std::uint8_t, 3> texture_color(const Vec3& p) {
  // Tissue-like base with low-frequency mottling.
  const double r = 170.0 + 55.0 * std::sin(0.31 * p.x() + 1.7) *
                               std::cos(0.23 * p.y() - 0.4) +
                   15.0 * std::sin(0.11 * p.z());
  const double g = 105.0 + 45.0 * std::sin(0.27 * p.y() + 0.9) *
                               std::cos(0.19 * p.z() + 2.1);
  const double b = 95.0 + 40.0 * std::cos(0.21 * p.x() - 1.3) *
                              std::sin(0.17 * p.z() + 0.6);
  const auto quantize = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
  };
  return {quantize(r), quantize(g), quantize(b)};
}

DepthFrame render_depth(const MeshBvh& bvh, const RigidPose& pose,
                        const CameraIntrinsics& k, const RenderConfig& cfg,
                        int frame_id, int n_threads) {
  k.validate();
  if (!pose.is_finite()) throw InvalidPose("render_depth: non-finite pose");

  DepthFrame frame = DepthFrame::allocate(k, frame_id);
  frame.pose = pose;

  const Eigen::Matrix3d rot = pose.rotation.toRotationMatrix();
  const Vec3 center = pose.translation;
  const std::size_t n_pixels =
      static_cast<std::size_t>(k.width) * k.height;
  const std::uint64_t noise_stream =
      hash_combine(cfg.seed, static_cast<std::uint64_t>(frame_id));

  parallel_for_blocks(n_pixels, n_threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t px = lo; px < hi; ++px) {
      const int u = static_cast<int>(px % k.width);
      const int v = static_cast<int>(px / k.width);
      // Unit z-component makes the ray parameter equal the z-depth.
      const Vec3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const Vec3 dir = rot * dir_cam;
      const auto hit = bvh.raycast(center, dir, 1e-9);
      if (!hit) continue;  // invalid pixel, mean stays 0

      const double depth = hit->t;
      double mean = depth;
      if (cfg.noise_sigma_rel > 0.0) {
        const double g = counter_gaussian(noise_stream, 0, px);
        mean = std::max(depth * (1.0 + cfg.noise_sigma_rel * g), 1e-9);
      }
      frame.mean[px] = mean;
      frame.stddev[px] =
          std::max(cfg.noise_sigma_rel * depth, cfg.sigma_floor);
      const auto rgb = texture_color(center + hit->t * dir);
      frame.color[3 * px] = rgb[0];
      frame.color[3 * px + 1] = rgb[1];
      frame.color[3 * px + 2] = rgb[2];
    }
  });
  return frame;
}

DepthFrame render_depth(const TriangleMesh& mesh, const RigidPose& pose,
                        const CameraIntrinsics& k, const RenderConfig& cfg,
                        int frame_id, int n_threads) {
  if (mesh.empty()) throw DegenerateMesh("render_depth: mesh has no triangles");
  return render_depth(MeshBvh(mesh), pose, k, cfg, frame_id, n_threads);
}

SparsePointCloud sample_sparse(const TriangleMesh& mesh,
                               std::span<const RigidPose> poses,
                               const CameraIntrinsics& k, int n_points,
                               std::uint64_t seed) {
  if (n_points < 1) throw InvalidSpec("sample_sparse: n_points must be >= 1");
  if (mesh.empty()) throw DegenerateMesh("sample_sparse: empty mesh");
  const MeshBvh bvh(mesh);

  std::vector<double> cdf(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    total += 0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                       .norm();
    cdf[i] = total;
  }
  if (total <= 0.0) throw DegenerateMesh("sample_sparse: zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SparsePointCloud cloud;
  const long max_attempts = 200l * n_points + 1000l;
  for (long attempt = 0;
       attempt < max_attempts &&
       cloud.points.size() < static_cast<std::size_t>(n_points);
       ++attempt) {
    const double pick = unit(rng) * total;
    const std::size_t tri_idx = std::min(
        static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin()),
        cdf.size() - 1);
    const auto& tri = mesh.triangles[tri_idx];
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const Vec3 p = (1.0 - r1) * mesh.vertices[tri[0]] +
                   r1 * (1.0 - r2) * mesh.vertices[tri[1]] +
                   r1 * r2 * mesh.vertices[tri[2]];
    const Vec3 normal = mesh.triangle_normal(static_cast<std::uint32_t>(tri_idx));

    std::vector<std::uint32_t> visible;
    for (std::size_t f = 0; f < poses.size(); ++f) {
      const RigidPose& pose = poses[f];
      const Vec3 cam = pose.to_camera(p);
      if (!(cam.z() > 1e-9)) continue;
      const Vec2 px(k.fx * cam.x() / cam.z() + k.cx,
                    k.fy * cam.y() / cam.z() + k.cy);
      if (!k.in_bounds(px.x(), px.y())) continue;
      const Vec3 to_camera = pose.center() - p;
      if (!(normal.dot(to_camera) > 0.0)) continue;  // back-facing
      // Unoccluded: the first hit along the ray is the sample itself.
      const auto hit = bvh.raycast(pose.center(), p - pose.center(), 1e-9);
      if (!hit || std::abs(hit->t - 1.0) > 1e-6) continue;
      visible.push_back(static_cast<std::uint32_t>(f));
    }
    if (visible.size() >= 2) {
      cloud.points.push_back(p);
      cloud.visibility.push_back(std::move(visible));
    }
  }
  if (cloud.points.empty())
    throw NoVisibleSurface("sample_sparse: no surface point visible twice");
  return cloud;
}

}  // namespace cavrec
