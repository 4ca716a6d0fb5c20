#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>

#include "cavrec/bvh.hpp"
#include "cavrec/mesh.hpp"

namespace cavrec::test {

inline CameraIntrinsics test_intrinsics(int width = 128, int height = 96) {
  CameraIntrinsics k;
  k.fx = k.fy = 0.6 * width;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.width = width;
  k.height = height;
  return k;
}

inline Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Quat q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  return q;
}

inline Vec3 random_vec(std::mt19937_64& rng, double half_range) {
  std::uniform_real_distribution<double> u(-half_range, half_range);
  return {u(rng), u(rng), u(rng)};
}

// Independent point-triangle distance: plane projection when the barycentric
// foot lies inside, else the best of the three segment distances.
inline double brute_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                   const Vec3& c) {
  const auto segment = [](const Vec3& q, const Vec3& s0, const Vec3& s1) {
    const Vec3 d = s1 - s0;
    const double len_sq = d.squaredNorm();
    const double t =
        len_sq > 0.0 ? std::clamp((q - s0).dot(d) / len_sq, 0.0, 1.0) : 0.0;
    return (q - (s0 + t * d)).norm();
  };
  const Vec3 n = (b - a).cross(c - a);
  const double n_sq = n.squaredNorm();
  if (n_sq > 0.0) {
    const Vec3 foot = p - n * (n.dot(p - a) / n_sq);
    const Vec3 v0 = b - a, v1 = c - a, v2 = foot - a;
    const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    const double d20 = v2.dot(v0), d21 = v2.dot(v1);
    const double denom = d00 * d11 - d01 * d01;
    if (denom > 0.0) {
      const double v = (d11 * d20 - d01 * d21) / denom;
      const double w = (d00 * d21 - d01 * d20) / denom;
      if (v >= 0.0 && w >= 0.0 && v + w <= 1.0) return (p - foot).norm();
    }
  }
  return std::min({segment(p, a, b), segment(p, b, c), segment(p, c, a)});
}

inline double brute_point_mesh(const Vec3& p, const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles)
    best = std::min(best, brute_point_triangle(p, mesh.vertices[t[0]],
                                               mesh.vertices[t[1]],
                                               mesh.vertices[t[2]]));
  return best;
}

// Independent ray-triangle intersection via a barycentric linear solve.
inline bool brute_ray_triangle(const Vec3& origin, const Vec3& dir,
                               const Vec3& a, const Vec3& b, const Vec3& c,
                               double* t_out) {
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = -dir;
  if (std::abs(m.determinant()) < 1e-16) return false;
  const Vec3 x = m.fullPivLu().solve(origin - a);
  if (x[0] < 0.0 || x[1] < 0.0 || x[0] + x[1] > 1.0 || x[2] <= 0.0)
    return false;
  *t_out = x[2];
  return true;
}

inline double brute_raycast(const Vec3& origin, const Vec3& dir,
                            const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : mesh.triangles) {
    double t;
    if (brute_ray_triangle(origin, dir, mesh.vertices[tri[0]],
                           mesh.vertices[tri[1]], mesh.vertices[tri[2]], &t))
      best = std::min(best, t);
  }
  return best;
}

// Every undirected edge shared by two triangles must be traversed once in
// each direction; detects winding flips that edge counting cannot.
inline bool orientation_consistent(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const std::uint64_t a = t[i], b = t[(i + 1) % 3];
      ++directed[(a << 32) | b];
    }
  }
  for (const auto& [key, count] : directed) {
    const std::uint64_t reversed = (key << 32) | (key >> 32);
    auto it = directed.find(reversed);
    const int back = it == directed.end() ? 0 : it->second;
    if (count > 1) return false;            // same directed edge twice
    if (back > 1) return false;
    // Unmatched directed edges are open boundary, which is fine; two
    // identical directions on a shared edge are not.
  }
  return true;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Closed unit tetrahedron, outward wound.
inline TriangleMesh tetrahedron() {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  mesh.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return mesh;
}

}  // namespace cavrec::test
