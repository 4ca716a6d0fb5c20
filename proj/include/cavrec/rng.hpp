#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace cavrec {

// SplitMix64 finalizer. Bijective, so distinct counters give distinct states.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Uniform in (0,1); never returns 0 or 1, safe under log().
inline double counter_uniform(std::uint64_t key) {
  return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal draw addressed by (seed, stream, index). Stateless:
// parallel callers read identical values regardless of scheduling.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) {
  const std::uint64_t key = hash_combine(hash_combine(seed, stream), index);
  const double u1 = counter_uniform(key);
  const double u2 = counter_uniform(key ^ 0x5851f42d4c957f2dull);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Named substream of a root seed, e.g. derive_seed(seed, "subsample").
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return hash_combine(root, h);
}

}  // namespace cavrec
