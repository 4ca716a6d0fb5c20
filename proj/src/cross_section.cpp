#include "cavrec/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace cavrec {

namespace {

using EdgeKey = std::uint64_t;

EdgeKey edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct Crossing {
  Vec2 position = Vec2::Zero();        // plane coordinates
  std::uint32_t link[2] = {0, 0};      // neighbor slots (indices into keys)
  int links = 0;
};

double shoelace_area(std::span<const Vec2> loop) {
  double twice = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % loop.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> loop) {
  bool inside = false;
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

}  // namespace

CrossSection cross_section(const TriangleMesh& mesh, const RigidPose& pose) {
  if (mesh.empty()) throw EmptyMesh("cross_section: empty mesh");

  CrossSection section;
  section.plane_origin = pose.center();
  section.plane_normal = pose.optical_axis().normalized();
  const Vec3& n = section.plane_normal;

  // Orthonormal in-plane basis; the axis least aligned with n seeds it.
  int seed_axis = 0;
  n.cwiseAbs().minCoeff(&seed_axis);
  const Vec3 e1 = n.cross(Vec3::Unit(seed_axis)).normalized();
  const Vec3 e2 = n.cross(e1);

  std::vector<double> signed_dist(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    signed_dist[i] = n.dot(mesh.vertices[i] - section.plane_origin);
  // Vertices exactly on the plane count as positive, which keeps the
  // crossing classification consistent across neighboring triangles.
  const auto negative = [&](std::uint32_t v) { return signed_dist[v] < 0.0; };

  std::unordered_map<EdgeKey, std::uint32_t> slot_of;
  std::vector<Crossing> crossings;
  std::vector<EdgeKey> keys;

  const auto crossing_slot = [&](std::uint32_t a,
                                 std::uint32_t b) -> std::uint32_t {
    const EdgeKey key = edge_key(a, b);
    auto it = slot_of.find(key);
    if (it != slot_of.end()) return it->second;
    // Interpolate on the canonical (min,max) vertex order so both incident
    // triangles compute bit-identical coordinates.
    const std::uint32_t lo = std::min(a, b), hi = std::max(a, b);
    const double dl = signed_dist[lo], dh = signed_dist[hi];
    const double t = dl / (dl - dh);
    const Vec3 p =
        mesh.vertices[lo] + t * (mesh.vertices[hi] - mesh.vertices[lo]);
    Crossing c;
    const Vec3 rel = p - section.plane_origin;
    c.position = Vec2(rel.dot(e1), rel.dot(e2));
    const std::uint32_t slot = static_cast<std::uint32_t>(crossings.size());
    crossings.push_back(c);
    keys.push_back(key);
    slot_of.emplace(key, slot);
    return slot;
  };

  for (const auto& tri : mesh.triangles) {
    std::uint32_t crossed[3];
    int n_crossed = 0;
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = tri[e];
      const std::uint32_t b = tri[(e + 1) % 3];
      if (negative(a) != negative(b)) crossed[n_crossed++] = crossing_slot(a, b);
    }
    if (n_crossed != 2) continue;
    for (int s = 0; s < 2; ++s) {
      Crossing& c = crossings[crossed[s]];
      if (c.links < 2) c.link[c.links] = crossed[1 - s];
      ++c.links;
    }
  }

  if (crossings.empty())
    throw NoIntersection("cross_section: plane misses the mesh");

  // Walk the crossing graph into loops; chains that dead-end at boundary or
  // non-manifold edges are dropped.
  std::vector<std::vector<Vec2>> loops;
  std::vector<bool> visited(crossings.size(), false);
  for (std::uint32_t start = 0; start < crossings.size(); ++start) {
    if (visited[start] || crossings[start].links != 2) continue;
    std::vector<std::uint32_t> loop_slots;
    std::uint32_t prev = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t cur = start;
    bool closed = false;
    while (true) {
      visited[cur] = true;
      loop_slots.push_back(cur);
      const Crossing& c = crossings[cur];
      if (c.links != 2) break;  // open or non-manifold junction
      const std::uint32_t next = c.link[0] == prev ? c.link[1] : c.link[0];
      if (next == start) {
        closed = true;
        break;
      }
      if (visited[next]) break;
      prev = cur;
      cur = next;
    }
    if (!closed || loop_slots.size() < 3) continue;
    std::vector<Vec2> loop;
    loop.reserve(loop_slots.size());
    for (std::uint32_t s : loop_slots) loop.push_back(crossings[s].position);
    loops.push_back(std::move(loop));
  }

  if (loops.empty())
    throw OpenContour("cross_section: intersection contour does not close");

  // The camera sits inside the lumen being measured: prefer the innermost
  // loop containing it, else the loop whose centroid is nearest.
  int best = -1;
  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (!point_in_polygon(Vec2::Zero(), loops[i])) continue;
    const double a = shoelace_area(loops[i]);
    if (a < best_area) {
      best_area = a;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < loops.size(); ++i) {
      Vec2 centroid = Vec2::Zero();
      for (const Vec2& p : loops[i]) centroid += p;
      centroid /= static_cast<double>(loops[i].size());
      const double d = centroid.norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
  }

  section.contour = loops[best];
  section.contour.push_back(section.contour.front());
  section.area = shoelace_area(loops[best]);
  return section;
}

SectionSeriesResult cross_section_series(
    const TriangleMesh& recon, const TriangleMesh& reference,
    std::span<const RigidPose> trajectory,
    const SimilarityTransform& registration) {
  if (trajectory.empty())
    throw InvalidSpec("cross_section_series: empty trajectory");

  const TriangleMesh recon_in_ref = transformed(recon, registration);

  SectionSeriesResult result;
  double sum = 0.0;
  for (const RigidPose& pose : trajectory) {
    const RigidPose registered = registration.apply(pose);
    try {
      const double a_recon = cross_section(recon_in_ref, registered).area;
      const double a_ref = cross_section(reference, registered).area;
      sum += std::abs(a_recon - a_ref) / a_ref;
      ++result.valid_count;
    } catch (const NoIntersection&) {
      ++result.skipped_count;
    } catch (const OpenContour&) {
      ++result.skipped_count;
    }
  }
  if (result.valid_count == 0)
    throw AllSectionsFailed("cross_section_series: every pose failed");
  result.mean_relative_difference = sum / result.valid_count;
  return result;
}

}  // namespace cavrec
