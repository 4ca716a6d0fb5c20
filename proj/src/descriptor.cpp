#include "cavrec/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cavrec {

DescriptorMap::DescriptorMap(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0)
    throw InvalidSpec("DescriptorMap: non-positive dimensions");
  data_.assign(
      static_cast<std::size_t>(width) * height * channels, 0.0f);
}

void DescriptorMap::normalize() {
  for (int v = 0; v < height_; ++v) {
    for (int u = 0; u < width_; ++u) {
      auto px = at(u, v);
      double norm_sq = 0.0;
      for (float x : px) norm_sq += static_cast<double>(x) * x;
      if (norm_sq <= 0.0) continue;
      const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
      for (float& x : px) x *= inv;
    }
  }
}

ResponseMap compute_response(std::span<const float> query,
                             const DescriptorMap& target) {
  if (static_cast<int>(query.size()) != target.channels())
    throw ChannelMismatch("compute_response: query channel count differs");
  ResponseMap map;
  map.width = target.width();
  map.height = target.height();
  map.values.resize(static_cast<std::size_t>(map.width) * map.height);
  std::size_t out = 0;
  for (int v = 0; v < map.height; ++v) {
    for (int u = 0; u < map.width; ++u) {
      const auto px = target.at(u, v);
      double dot = 0.0;
      for (std::size_t c = 0; c < query.size(); ++c)
        dot += static_cast<double>(query[c]) * px[c];
      // Unit-norm descriptors bound the true score by 1; anything beyond
      // is normalization rounding.
      map.values[out++] = static_cast<float>(std::clamp(dot, -1.0, 1.0));
    }
  }
  return map;
}

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t *
                  (p2 - p0 +
                   t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        t * (3.0 * (p1 - p2) + p3 - p0)));
}

float sample_clamped(const ResponseMap& map, int u, int v) {
  return map.at(std::clamp(u, 0, map.width - 1),
                std::clamp(v, 0, map.height - 1));
}

}  // namespace

double bicubic_sample(const ResponseMap& map, double u, double v) {
  const int iu = static_cast<int>(std::floor(u));
  const int iv = static_cast<int>(std::floor(v));
  const double fu = u - iu;
  const double fv = v - iv;
  double rows[4];
  for (int r = 0; r < 4; ++r) {
    const int y = iv - 1 + r;
    rows[r] = catmull_rom(sample_clamped(map, iu - 1, y),
                          sample_clamped(map, iu, y),
                          sample_clamped(map, iu + 1, y),
                          sample_clamped(map, iu + 2, y), fu);
  }
  return catmull_rom(rows[0], rows[1], rows[2], rows[3], fv);
}

SubpixelMatch match_subpixel(const Vec2& query_pixel,
                             const DescriptorMap& source,
                             const DescriptorMap& target, int refine_factor) {
  if (source.channels() != target.channels())
    throw ChannelMismatch("match_subpixel: channel counts differ");
  if (refine_factor < 1)
    throw InvalidSpec("match_subpixel: refine_factor must be >= 1");
  const int qu = static_cast<int>(std::lround(query_pixel.x()));
  const int qv = static_cast<int>(std::lround(query_pixel.y()));
  if (qu < 0 || qu >= source.width() || qv < 0 || qv >= source.height())
    throw OutOfBounds("match_subpixel: query pixel outside the source map");

  const ResponseMap response = compute_response(source.at(qu, qv), target);

  // Integer argmax; ties break to the lowest v, then lowest u.
  int bu = 0, bv = 0;
  float best_raw = response.at(0, 0);
  for (int v = 0; v < response.height; ++v) {
    for (int u = 0; u < response.width; ++u) {
      if (response.at(u, v) > best_raw) {
        best_raw = response.at(u, v);
        bu = u;
        bv = v;
      }
    }
  }

  SubpixelMatch match;
  match.pixel = Vec2(bu, bv);
  match.score = best_raw;

  // A score at the unit ceiling is an exact descriptor hit; interpolation
  // overshoot cannot legitimately improve on it.
  if (best_raw >= 1.0f - 1e-5f || refine_factor == 1) return match;

  const int steps = 2 * refine_factor;
  const double pitch = 1.0 / refine_factor;
  for (int dv = -steps; dv <= steps; ++dv) {
    for (int du = -steps; du <= steps; ++du) {
      const double u = bu + du * pitch;
      const double v = bv + dv * pitch;
      const double s = std::clamp(bicubic_sample(response, u, v), -1.0, 1.0);
      if (s > match.score) {
        match.score = s;
        match.pixel = Vec2(u, v);
      }
    }
  }
  return match;
}

AnalyticDescriptorField::AnalyticDescriptorField(int channels,
                                                 std::uint64_t seed) {
  if (channels < 2 || channels % 2 != 0)
    throw InvalidSpec("AnalyticDescriptorField: channels must be even >= 2");
  const int pairs = channels / 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.2, 0.9);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution flip(0.5);
  for (int i = 0; i < pairs; ++i) {
    freq_u_.push_back(freq(rng) * (flip(rng) ? 1.0 : -1.0));
    freq_v_.push_back(freq(rng) * (flip(rng) ? 1.0 : -1.0));
    phase_.push_back(phase(rng));
  }
}

void AnalyticDescriptorField::evaluate(double u, double v,
                                       std::span<float> out) const {
  const std::size_t pairs = freq_u_.size();
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(pairs));
  for (std::size_t i = 0; i < pairs; ++i) {
    const double psi = freq_u_[i] * u + freq_v_[i] * v + phase_[i];
    out[2 * i] = static_cast<float>(amplitude * std::cos(psi));
    out[2 * i + 1] = static_cast<float>(amplitude * std::sin(psi));
  }
}

DescriptorMap sample_field(const DescriptorField& field, int width, int height,
                           const Vec2& offset) {
  DescriptorMap map(width, height, field.channels());
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      field.evaluate(u + offset.x(), v + offset.y(), map.at(u, v));
  return map;
}

}  // namespace cavrec
