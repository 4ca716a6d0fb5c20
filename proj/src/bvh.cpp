#include "cavrec/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace cavrec {

// "Real-Time Collision Detection" 5.1.5: Voronoi-region walk.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;

  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

namespace {

double box_distance_sq(const Eigen::AlignedBox3d& box, const Vec3& p) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = box.min()[i] - p[i];
    const double hi = p[i] - box.max()[i];
    const double d = std::max({lo, hi, 0.0});
    d2 += d * d;
  }
  return d2;
}

// Slab test; inv_dir entries may be +-inf for axis-parallel rays.
bool box_hit(const Eigen::AlignedBox3d& box, const Vec3& origin,
             const Vec3& inv_dir, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int i = 0; i < 3; ++i) {
    double near = (box.min()[i] - origin[i]) * inv_dir[i];
    double far = (box.max()[i] - origin[i]) * inv_dir[i];
    if (std::isnan(near) || std::isnan(far)) continue;  // origin on slab plane
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

// Moller-Trumbore; t reported in units of |dir|.
bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                  const Vec3& b, const Vec3& c, double* t_out) {
  constexpr double kEps = 1e-14;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;
  *t_out = e2.dot(qvec) * inv_det;
  return true;
}

}  // namespace

MeshBvh::MeshBvh(const TriangleMesh& mesh) {
  if (mesh.empty()) throw EmptyMesh("MeshBvh: mesh has no triangles");
  const std::size_t n = mesh.triangles.size();
  tri_a_.resize(n);
  tri_b_.resize(n);
  tri_c_.resize(n);
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    tri_a_[i] = mesh.vertices[t[0]];
    tri_b_[i] = mesh.vertices[t[1]];
    tri_c_[i] = mesh.vertices[t[2]];
    order_[i] = static_cast<std::uint32_t>(i);
  }
  nodes_.reserve(2 * n);
  build(0, static_cast<std::uint32_t>(n));
}

std::int32_t MeshBvh::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  for (std::uint32_t i = begin; i < end; ++i) {
    const std::uint32_t t = order_[i];
    node.box.extend(tri_a_[t]);
    node.box.extend(tri_b_[t]);
    node.box.extend(tri_c_[t]);
  }
  const std::int32_t index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  constexpr std::uint32_t kLeafSize = 4;
  if (end - begin <= kLeafSize) {
    nodes_[index].begin = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis;
  node.box.diagonal().maxCoeff(&axis);
  const std::uint32_t mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t lhs, std::uint32_t rhs) {
                     const double cl = tri_a_[lhs][axis] + tri_b_[lhs][axis] +
                                       tri_c_[lhs][axis];
                     const double cr = tri_a_[rhs][axis] + tri_b_[rhs][axis] +
                                       tri_c_[rhs][axis];
                     return cl < cr;
                   });

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

MeshBvh::ClosestHit MeshBvh::closest(const Vec3& query) const {
  ClosestHit best;
  double best_sq = std::numeric_limits<double>::infinity();

  // Explicit stack ordered by child box distance.
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.box, query) >= best_sq) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.begin + node.count; ++i) {
        const std::uint32_t t = order_[i];
        const Vec3 cp =
            closest_point_on_triangle(query, tri_a_[t], tri_b_[t], tri_c_[t]);
        const double d2 = (cp - query).squaredNorm();
        if (d2 < best_sq) {
          best_sq = d2;
          best.point = cp;
          best.triangle = t;
        }
      }
      continue;
    }
    const double dl = box_distance_sq(nodes_[node.left].box, query);
    const double dr = box_distance_sq(nodes_[node.right].box, query);
    // Push the farther child first so the nearer one is explored next.
    if (dl <= dr) {
      if (dr < best_sq) stack[top++] = node.right;
      if (dl < best_sq) stack[top++] = node.left;
    } else {
      if (dl < best_sq) stack[top++] = node.left;
      if (dr < best_sq) stack[top++] = node.right;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

std::optional<MeshBvh::RayHit> MeshBvh::raycast(const Vec3& origin,
                                                const Vec3& dir, double t_min,
                                                double t_max) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  std::optional<RayHit> best;
  double best_t = t_max;

  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!box_hit(node.box, origin, inv_dir, best_t)) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.begin + node.count; ++i) {
        const std::uint32_t t = order_[i];
        double hit_t;
        if (ray_triangle(origin, dir, tri_a_[t], tri_b_[t], tri_c_[t],
                         &hit_t) &&
            hit_t > t_min && hit_t < best_t) {
          best_t = hit_t;
          best = RayHit{hit_t, t};
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return best;
}

}  // namespace cavrec
