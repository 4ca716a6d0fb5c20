#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cavrec/geometry.hpp"

namespace cavrec {

// Per-pixel feature descriptors, row-major and channel-interleaved.
// Every pixel's C-vector is unit-norm (within float rounding).
class DescriptorMap {
 public:
  DescriptorMap() = default;
  DescriptorMap(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  std::span<const float> at(int u, int v) const {
    return {data_.data() +
                (static_cast<std::size_t>(v) * width_ + u) * channels_,
            static_cast<std::size_t>(channels_)};
  }
  std::span<float> at(int u, int v) {
    return {data_.data() +
                (static_cast<std::size_t>(v) * width_ + u) * channels_,
            static_cast<std::size_t>(channels_)};
  }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  // Rescales every pixel vector to unit length (zero vectors untouched).
  void normalize();

 private:
  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<float> data_;
};

// Cosine-similarity scores of one query descriptor against a map.
struct ResponseMap {
  int width = 0, height = 0;
  std::vector<float> values;  // row-major, clamped to [-1, 1]

  float at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * width + u];
  }
};

// response(u,v) = dot(query, target(u,v)). Throws ChannelMismatch.
ResponseMap compute_response(std::span<const float> query,
                             const DescriptorMap& target);

// Catmull-Rom bicubic interpolation of a response map at a continuous
// position; border samples are clamped.
double bicubic_sample(const ResponseMap& map, double u, double v);

struct SubpixelMatch {
  Vec2 pixel = Vec2::Zero();
  double score = 0.0;
};

// Finds the best match of the source descriptor at query_pixel inside the
// target map: integer argmax of the response (ties to lowest v, then u),
// then the bicubic maximum over the 5x5 neighborhood sampled at a pitch of
// 1/refine_factor pixels. Throws OutOfBounds, ChannelMismatch.
SubpixelMatch match_subpixel(const Vec2& query_pixel,
                             const DescriptorMap& source,
                             const DescriptorMap& target, int refine_factor);

// Descriptor source evaluable at continuous image positions; lets the
// matching machinery run without a trained network.
class DescriptorField {
 public:
  virtual ~DescriptorField() = default;
  virtual int channels() const = 0;
  // Writes a unit-norm C-vector for image position (u, v).
  virtual void evaluate(double u, double v, std::span<float> out) const = 0;
};

// Smooth trigonometric field: channel pairs (cos, sin) of seeded random
// linear phase functions, scaled so the vector is exactly unit-norm.
class AnalyticDescriptorField final : public DescriptorField {
 public:
  // channels must be even and >= 2.
  AnalyticDescriptorField(int channels, std::uint64_t seed);

  int channels() const override { return 2 * static_cast<int>(freq_u_.size()); }
  void evaluate(double u, double v, std::span<float> out) const override;

 private:
  std::vector<double> freq_u_, freq_v_, phase_;
};

// Samples a field at integer pixels, optionally offset: pixel (u,v) takes
// the descriptor at (u + offset.x, v + offset.y).
DescriptorMap sample_field(const DescriptorField& field, int width, int height,
                           const Vec2& offset = Vec2::Zero());

}  // namespace cavrec
