#pragma once

#include <span>
#include <vector>

#include "cavrec/mesh.hpp"

namespace cavrec {

// Planar cut through a cavity mesh, anchored at a camera pose.
struct CrossSection {
  Vec3 plane_origin = Vec3::Zero();
  Vec3 plane_normal = Vec3::UnitZ();
  // Closed polyline in plane coordinates; first vertex repeated at the end.
  std::vector<Vec2> contour;
  double area = 0.0;
};

// Cuts the mesh with the plane through the camera center orthogonal to the
// optical axis, stitches the intersection segments into closed loops and
// measures the loop enclosing the camera center (fallback: nearest
// centroid). Throws NoIntersection, OpenContour.
CrossSection cross_section(const TriangleMesh& mesh, const RigidPose& pose);

struct SectionSeriesResult {
  double mean_relative_difference = 0.0;
  int valid_count = 0;
  int skipped_count = 0;
};

// Registers the reconstruction into the reference frame, then compares
// cross-sectional areas at every trajectory pose:
// |A_recon - A_ref| / A_ref, averaged over poses where both sections
// succeed. Throws AllSectionsFailed when no pose yields a pair of areas.
SectionSeriesResult cross_section_series(const TriangleMesh& recon,
                                         const TriangleMesh& reference,
                                         std::span<const RigidPose> trajectory,
                                         const SimilarityTransform& registration);

}  // namespace cavrec
