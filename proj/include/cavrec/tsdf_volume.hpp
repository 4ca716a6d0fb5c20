#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cavrec/depth_frame.hpp"
#include "cavrec/geometry.hpp"

namespace cavrec {

struct FusionConfig {
  double voxel_size = 1.0;
  double sigma_multiplier = 3.0;  // truncation = multiplier * sigma, clamped
  double tau_min = 2.0;
  double tau_max = 10.0;
  double weight_cap = 100.0;
  double sigma_floor = 1e-3;  // lower bound on sigma in the weight law

  enum class WeightLaw { kInverseSigma, kUniform };
  WeightLaw weight_law = WeightLaw::kInverseSigma;

  enum class ScaleMode { kPerFrame, kGlobal, kNone };
  ScaleMode scale_mode = ScaleMode::kPerFrame;

  // When unset, fuse_sequence fits bounds to the observed depths.
  std::optional<Eigen::AlignedBox3d> explicit_bounds;

  // tau_min = 2 voxels keeps a resolvable zero crossing; tau_max bounds the
  // influence of very uncertain measurements.
  static FusionConfig for_voxel_size(double vs) {
    FusionConfig cfg;
    cfg.voxel_size = vs;
    cfg.tau_min = 2.0 * vs;
    cfg.tau_max = 10.0 * vs;
    return cfg;
  }
  void validate() const;
};

// Truncation band half-width for a depth uncertainty sigma.
double truncation_for_sigma(double sigma, const FusionConfig& cfg);

// Axis-aligned voxel grid of truncated-signed-distance accumulators.
// tsdf in [-1,1] (positive between camera and surface), per-voxel weight,
// weighted-mean color. Storage is x-fastest.
class TsdfVolume {
 public:
  TsdfVolume(const Vec3& origin, double voxel_size, int nx, int ny, int nz);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }
  std::size_t voxel_count() const { return tsdf_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(ny_) * static_cast<std::size_t>(k));
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin_ + voxel_size_ * Vec3(i, j, k);
  }

  float tsdf_at(std::size_t idx) const { return tsdf_[idx]; }
  float weight_at(std::size_t idx) const { return weight_[idx]; }
  std::array<float, 3> color_at(std::size_t idx) const {
    return {color_[3 * idx], color_[3 * idx + 1], color_[3 * idx + 2]};
  }

  // Direct voxel write, used by tests and analytic volume builders.
  void set_voxel(std::size_t idx, float tsdf, float weight,
                 const std::array<float, 3>& rgb = {0, 0, 0});

  // Folds one weighted sample into the running weighted mean of a voxel.
  void accumulate(std::size_t idx, float sample, float sample_weight,
                  const std::array<float, 3>& rgb, float weight_cap);

  std::span<const float> tsdf() const { return tsdf_; }
  std::span<const float> weights() const { return weight_; }
  std::span<const float> colors() const { return color_; }

 private:
  Vec3 origin_;
  double voxel_size_;
  int nx_, ny_, nz_;
  std::vector<float> tsdf_;
  std::vector<float> weight_;
  std::vector<float> color_;  // 3 per voxel, weighted means
};

// Integrates one scale-corrected depth frame into the volume. Every voxel is
// projected into the image with nearest-neighbor depth lookup; voxels more
// than one truncation band behind the measured surface are left untouched.
// Deterministic for any thread count. Throws InvalidPose, EmptyVolume.
void integrate_frame(TsdfVolume& vol, const DepthFrame& frame,
                     const FusionConfig& cfg, int n_threads = 1);

struct FrameScaleLog {
  int frame_id = 0;
  double scale = 1.0;
  int landmarks_used = 0;
};

// Rescales each frame against the sparse cloud, fits volume bounds to the
// observed depths padded by tau_max (unless explicit bounds are given) and
// integrates the frames in order. Throws NoValidDepths.
TsdfVolume fuse_sequence(std::span<const DepthFrame> frames,
                         const SparsePointCloud& cloud,
                         const FusionConfig& cfg,
                         std::vector<FrameScaleLog>* scale_log = nullptr,
                         int n_threads = 1);

}  // namespace cavrec
