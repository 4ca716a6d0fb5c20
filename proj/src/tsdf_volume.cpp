#include "cavrec/tsdf_volume.hpp"

#include <algorithm>
#include <cmath>

#include "cavrec/parallel.hpp"

namespace cavrec {

void FusionConfig::validate() const {
  if (!(voxel_size > 0.0)) throw InvalidSpec("fusion: voxel_size must be > 0");
  if (!(tau_min > 0.0) || tau_min > tau_max)
    throw InvalidSpec("fusion: need 0 < tau_min <= tau_max");
  if (!(sigma_multiplier > 0.0))
    throw InvalidSpec("fusion: sigma_multiplier must be > 0");
  if (!(weight_cap > 0.0)) throw InvalidSpec("fusion: weight_cap must be > 0");
}

double truncation_for_sigma(double sigma, const FusionConfig& cfg) {
  return std::clamp(cfg.sigma_multiplier * sigma, cfg.tau_min, cfg.tau_max);
}

TsdfVolume::TsdfVolume(const Vec3& origin, double voxel_size, int nx, int ny,
                       int nz)
    : origin_(origin), voxel_size_(voxel_size), nx_(nx), ny_(ny), nz_(nz) {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw EmptyVolume("TsdfVolume: zero-sized grid");
  if (!(voxel_size > 0.0)) throw InvalidSpec("TsdfVolume: voxel_size <= 0");
  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  if (n > (std::size_t(1) << 31))
    throw InvalidSpec("TsdfVolume: grid larger than 2^31 voxels");
  tsdf_.assign(n, 1.0f);  // untouched voxels read as far free space
  weight_.assign(n, 0.0f);
  color_.assign(3 * n, 0.0f);
}

void TsdfVolume::set_voxel(std::size_t idx, float tsdf, float weight,
                           const std::array<float, 3>& rgb) {
  tsdf_[idx] = tsdf;
  weight_[idx] = weight;
  color_[3 * idx] = rgb[0];
  color_[3 * idx + 1] = rgb[1];
  color_[3 * idx + 2] = rgb[2];
}

void TsdfVolume::accumulate(std::size_t idx, float sample, float sample_weight,
                            const std::array<float, 3>& rgb,
                            float weight_cap) {
  const float w_old = weight_[idx];
  const float w_new = w_old + sample_weight;
  const float inv = 1.0f / w_new;
  if (w_old == 0.0f) {
    tsdf_[idx] = sample;
    for (int c = 0; c < 3; ++c) color_[3 * idx + c] = rgb[c];
  } else {
    tsdf_[idx] = (w_old * tsdf_[idx] + sample_weight * sample) * inv;
    for (int c = 0; c < 3; ++c)
      color_[3 * idx + c] =
          (w_old * color_[3 * idx + c] + sample_weight * rgb[c]) * inv;
  }
  weight_[idx] = std::min(w_new, weight_cap);
}

void integrate_frame(TsdfVolume& vol, const DepthFrame& frame,
                     const FusionConfig& cfg, int n_threads) {
  if (!frame.pose.is_finite())
    throw InvalidPose("integrate_frame: non-finite pose");
  if (vol.voxel_count() == 0) throw EmptyVolume("integrate_frame");
  cfg.validate();

  const Eigen::Matrix3d world_to_cam =
      frame.pose.rotation.conjugate().toRotationMatrix();
  const Vec3 cam_center = frame.pose.translation;
  const CameraIntrinsics& k = frame.intrinsics;
  const bool has_color = !frame.color.empty();
  const float weight_cap = static_cast<float>(cfg.weight_cap);

  const std::size_t n_slices = static_cast<std::size_t>(vol.nz());
  parallel_for_blocks(
      n_slices, n_threads, [&](std::size_t kz0, std::size_t kz1) {
        for (std::size_t kz = kz0; kz < kz1; ++kz) {
          for (int j = 0; j < vol.ny(); ++j) {
            for (int i = 0; i < vol.nx(); ++i) {
              const Vec3 world =
                  vol.voxel_center(i, j, static_cast<int>(kz));
              const Vec3 cam = world_to_cam * (world - cam_center);
              const double z = cam.z();
              if (!(z > 0.0)) continue;
              const double u = k.fx * cam.x() / z + k.cx;
              const double v = k.fy * cam.y() / z + k.cy;
              if (!k.in_bounds(u, v)) continue;
              const int pu = static_cast<int>(std::lround(u));
              const int pv = static_cast<int>(std::lround(v));
              const std::size_t px = frame.pixel_index(pu, pv);
              const double depth = frame.mean[px];
              if (!(depth > 0.0)) continue;  // invalid pixel

              const double sigma = frame.stddev[px];
              const double tau = truncation_for_sigma(sigma, cfg);
              const double sdf = depth - z;
              if (sdf < -tau) continue;  // occluded: behind the surface

              const float sample =
                  static_cast<float>(std::clamp(sdf / tau, -1.0, 1.0));
              const float w =
                  cfg.weight_law == FusionConfig::WeightLaw::kInverseSigma
                      ? static_cast<float>(
                            1.0 / std::max(sigma, cfg.sigma_floor))
                      : 1.0f;
              std::array<float, 3> rgb = {0, 0, 0};
              if (has_color) {
                rgb = {static_cast<float>(frame.color[3 * px]),
                       static_cast<float>(frame.color[3 * px + 1]),
                       static_cast<float>(frame.color[3 * px + 2])};
              }
              vol.accumulate(vol.index(i, j, static_cast<int>(kz)), sample, w,
                             rgb, weight_cap);
            }
          }
        }
      });
}

namespace {

// Scale factor for one frame under the configured recovery mode.
double frame_scale(const DepthFrame& frame, const SparsePointCloud& cloud,
                   const FusionConfig& cfg, double global_scale,
                   int* landmarks_used) {
  *landmarks_used = 0;
  switch (cfg.scale_mode) {
    case FusionConfig::ScaleMode::kNone:
      return 1.0;
    case FusionConfig::ScaleMode::kGlobal:
      return global_scale;
    case FusionConfig::ScaleMode::kPerFrame:
      try {
        // recover_scale counts contributing landmarks implicitly; recompute
        // the count for the log.
        const double s = recover_scale(frame, cloud);
        int n = 0;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
          const auto& vis = cloud.visibility[i];
          if (std::find(vis.begin(), vis.end(),
                        static_cast<std::uint32_t>(frame.frame_id)) !=
              vis.end())
            ++n;
        }
        *landmarks_used = n;
        return s;
      } catch (const NoVisiblePoints&) {
        return 1.0;  // nothing to anchor this frame; leave it unscaled
      }
  }
  return 1.0;
}

}  // namespace

TsdfVolume fuse_sequence(std::span<const DepthFrame> frames,
                         const SparsePointCloud& cloud,
                         const FusionConfig& cfg,
                         std::vector<FrameScaleLog>* scale_log,
                         int n_threads) {
  if (frames.empty()) throw NoValidDepths("fuse_sequence: no frames");
  cfg.validate();

  double global_scale = 1.0;
  if (cfg.scale_mode == FusionConfig::ScaleMode::kGlobal)
    global_scale = recover_scale_global(frames, cloud);

  // Rescale frames up front; bounds and integration both need them.
  std::vector<DepthFrame> scaled;
  scaled.reserve(frames.size());
  for (const DepthFrame& frame : frames) {
    int used = 0;
    const double s = frame_scale(frame, cloud, cfg, global_scale, &used);
    if (scale_log) scale_log->push_back({frame.frame_id, s, used});
    scaled.push_back(s == 1.0 ? frame : apply_scale(frame, s));
  }

  Eigen::AlignedBox3d box;
  if (cfg.explicit_bounds) {
    box = *cfg.explicit_bounds;
  } else {
    for (const DepthFrame& frame : scaled) {
      for (int v = 0; v < frame.height; ++v) {
        for (int u = 0; u < frame.width; ++u) {
          const double d = frame.mean[frame.pixel_index(u, v)];
          if (!(d > 0.0)) continue;
          box.extend(frame.pose.to_world(
              unproject(Vec2(u, v), d, frame.intrinsics)));
        }
      }
    }
    if (box.isEmpty())
      throw NoValidDepths("fuse_sequence: every depth pixel is invalid");
    box.min().array() -= cfg.tau_max;
    box.max().array() += cfg.tau_max;
  }

  const Vec3 extent = box.max() - box.min();
  const int nx = static_cast<int>(std::ceil(extent.x() / cfg.voxel_size)) + 2;
  const int ny = static_cast<int>(std::ceil(extent.y() / cfg.voxel_size)) + 2;
  const int nz = static_cast<int>(std::ceil(extent.z() / cfg.voxel_size)) + 2;
  TsdfVolume vol(box.min(), cfg.voxel_size, nx, ny, nz);

  for (const DepthFrame& frame : scaled)
    integrate_frame(vol, frame, cfg, n_threads);
  return vol;
}

}  // namespace cavrec
