#pragma once

#include <cstdint>
#include <vector>

#include "cavrec/mesh.hpp"

namespace cavrec {

// Procedural cavity: a gently bent tube with a varying radius profile and a
// sinusoidal wall perturbation. Stands in for real anatomy as the ground
// truth of every end-to-end test.
struct PhantomSpec {
  double length = 120.0;  // world units (mm at the default scale)
  // Radii at evenly spaced axial stations, linearly interpolated.
  std::vector<double> radius_control = {10.0, 16.0, 20.0, 14.0, 9.0};
  double bump_amplitude = 1.2;
  double bump_frequency = 5.0;  // angular lobes (rounded to an integer)
  double bend_amplitude = 8.0;  // lateral deflection of the tube axis
  int axial_segments = 96;
  int angular_segments = 64;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidSpec

  // Axis curve and local frame, t in [0,1].
  Vec3 axis_point(double t) const;
  Vec3 axis_tangent(double t) const;
  // Base radius before the bump perturbation.
  double base_radius(double t) const;
  // Full wall radius at (t, theta); phases are seeded.
  double wall_radius(double t, double theta) const;
};

// Watertight tube mesh with end caps, wound with normals into the cavity,
// textured by the procedural wall color. Deterministic per seed.
TriangleMesh generate_phantom(const PhantomSpec& spec);

// Camera path through the cavity: centers on the axis with small smooth
// lateral offsets, optical axis along the tube with a smooth look-around.
// The first pose looks back down the tube so the entry region is observed;
// at the endpoints the optical axis is exactly parallel to the tube axis.
// Throws InvalidSpec for n_frames < 2.
std::vector<RigidPose> generate_trajectory(const PhantomSpec& spec,
                                           int n_frames);

}  // namespace cavrec
