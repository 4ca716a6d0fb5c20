#include "cavrec/depth_frame.hpp"

#include <algorithm>
#include <cmath>

namespace cavrec {

DepthFrame DepthFrame::allocate(const CameraIntrinsics& k, int frame_id) {
  DepthFrame f;
  f.width = k.width;
  f.height = k.height;
  f.mean.assign(static_cast<std::size_t>(k.width) * k.height, 0.0);
  f.stddev.assign(f.mean.size(), 0.0);
  f.color.assign(3 * f.mean.size(), 0);
  f.intrinsics = k;
  f.frame_id = frame_id;
  return f;
}

namespace {

// Depth ratios and residual inputs for landmarks that land on valid pixels.
template <typename Fn>
int for_each_visible_landmark(const DepthFrame& frame,
                              const SparsePointCloud& cloud, Fn&& fn) {
  int used = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& vis = cloud.visibility[i];
    if (std::find(vis.begin(), vis.end(),
                  static_cast<std::uint32_t>(frame.frame_id)) == vis.end())
      continue;
    const Vec3 cam = frame.pose.to_camera(cloud.points[i]);
    if (!(cam.z() > 0.0)) continue;
    const Vec2 px = project(cam, frame.intrinsics);
    if (!frame.intrinsics.in_bounds(px.x(), px.y())) continue;
    const int u = static_cast<int>(std::lround(px.x()));
    const int v = static_cast<int>(std::lround(px.y()));
    if (!frame.valid_at(u, v)) continue;  // invalid pixels are skipped
    const std::size_t idx = frame.pixel_index(u, v);
    fn(cam.z(), frame.mean[idx], frame.stddev[idx]);
    ++used;
  }
  return used;
}

double median_inplace(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

double nll_score(const DepthFrame& frame, const SparsePointCloud& cloud) {
  double score = 0.0;
  const int used = for_each_visible_landmark(
      frame, cloud, [&](double z, double mu, double sigma) {
        const double r = z - mu;
        score += r * r / (2.0 * sigma * sigma) + std::log(sigma);
      });
  if (used == 0)
    throw NoVisiblePoints("nll_score: no landmark visible in frame");
  return score;
}

double recover_scale(const DepthFrame& frame, const SparsePointCloud& cloud) {
  std::vector<double> ratios;
  for_each_visible_landmark(frame, cloud,
                            [&](double z, double mu, double /*sigma*/) {
                              ratios.push_back(z / mu);
                            });
  if (ratios.empty())
    throw NoVisiblePoints("recover_scale: no landmark visible in frame");
  return median_inplace(ratios);
}

double recover_scale_global(std::span<const DepthFrame> frames,
                            const SparsePointCloud& cloud) {
  std::vector<double> ratios;
  for (const DepthFrame& frame : frames) {
    for_each_visible_landmark(frame, cloud,
                              [&](double z, double mu, double /*sigma*/) {
                                ratios.push_back(z / mu);
                              });
  }
  if (ratios.empty())
    throw NoVisiblePoints("recover_scale_global: no visible landmarks");
  return median_inplace(ratios);
}

DepthFrame apply_scale(const DepthFrame& frame, double s) {
  if (!(s > 0.0)) throw NonPositiveScale("apply_scale: scale must be > 0");
  DepthFrame out = frame;
  for (std::size_t i = 0; i < out.mean.size(); ++i) {
    if (out.mean[i] > 0.0) {
      out.mean[i] *= s;
      out.stddev[i] *= s;
    }
  }
  return out;
}

}  // namespace cavrec
