#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cavrec/geometry.hpp"

namespace cavrec {

// One posed video frame with a pixel-wise Gaussian depth estimate.
// Invalid pixels carry mean == 0; valid pixels have mean > 0 and stddev > 0.
struct DepthFrame {
  int width = 0, height = 0;
  std::vector<double> mean;    // width*height, row-major, world units
  std::vector<double> stddev;  // width*height, row-major, world units
  std::vector<std::uint8_t> color;  // 3*width*height RGB, may be empty
  RigidPose pose;              // camera-to-world
  CameraIntrinsics intrinsics;
  int frame_id = 0;

  std::size_t pixel_index(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  bool valid_at(int u, int v) const { return mean[pixel_index(u, v)] > 0.0; }

  static DepthFrame allocate(const CameraIntrinsics& k, int frame_id = 0);
};

// Sparse landmarks with the set of frame ids observing each point.
struct SparsePointCloud {
  std::vector<Vec3> points;
  std::vector<std::vector<std::uint32_t>> visibility;

  std::size_t size() const { return points.size(); }
};

// Negative log-likelihood of the landmark depths under the frame's Gaussian
// model: sum of (z - mu)^2 / (2 sigma^2) + ln(sigma) over landmarks visible
// in the frame, looked up at the nearest pixel. Constant terms omitted.
// Throws NoVisiblePoints when no landmark contributes.
double nll_score(const DepthFrame& frame, const SparsePointCloud& cloud);

// Median of (landmark camera depth / predicted mean depth) over visible
// landmarks with valid depth pixels. Throws NoVisiblePoints.
double recover_scale(const DepthFrame& frame, const SparsePointCloud& cloud);

// Pooled-median variant over a whole sequence.
double recover_scale_global(std::span<const DepthFrame> frames,
                            const SparsePointCloud& cloud);

// Multiplies mean and stddev by s; pose and color untouched.
// Throws NonPositiveScale.
DepthFrame apply_scale(const DepthFrame& frame, double s);

}  // namespace cavrec
