#include "cavrec/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cavrec/render.hpp"
#include "cavrec/rng.hpp"

namespace cavrec {

namespace {

constexpr double kPi = std::numbers::pi;

// Seeded bump phases; constant per spec seed.
struct BumpPhases {
  double axial = 0.0;
  double angular = 0.0;
};

BumpPhases bump_phases(const PhantomSpec& spec) {
  std::mt19937_64 rng(derive_seed(spec.seed, "phantom-bumps"));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  BumpPhases p;
  p.axial = phase(rng);
  p.angular = phase(rng);
  return p;
}

// Local frame: n1, n2 orthogonal to the tangent, right-handed (n1, n2, T).
void axis_frame(const PhantomSpec& spec, double t, Vec3* n1, Vec3* n2,
                Vec3* tangent) {
  const Vec3 T = spec.axis_tangent(t);
  // The axis bends in the xz-plane, so +y is never parallel to T.
  *n1 = Vec3::UnitY().cross(T).normalized();
  *n2 = T.cross(*n1);
  *tangent = T;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(length > 0.0)) throw InvalidSpec("phantom: length must be positive");
  if (radius_control.empty())
    throw InvalidSpec("phantom: radius profile needs control points");
  if (axial_segments < 16 || angular_segments < 16)
    throw InvalidSpec("phantom: tessellation must be at least 16x16");
  if (bump_amplitude < 0.0)
    throw InvalidSpec("phantom: bump amplitude must be non-negative");
  const double min_base =
      *std::min_element(radius_control.begin(), radius_control.end());
  if (!(min_base - bump_amplitude > 0.0))
    throw InvalidSpec("phantom: wall radius collapses under the bumps");
}

Vec3 PhantomSpec::axis_point(double t) const {
  return {bend_amplitude * std::sin(kPi * t), 0.0, t * length};
}

Vec3 PhantomSpec::axis_tangent(double t) const {
  return Vec3(bend_amplitude * kPi * std::cos(kPi * t), 0.0, length)
      .normalized();
}

double PhantomSpec::base_radius(double t) const {
  if (radius_control.size() == 1) return radius_control.front();
  const double x =
      std::clamp(t, 0.0, 1.0) * static_cast<double>(radius_control.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(x),
                                 radius_control.size() - 2);
  const double f = x - static_cast<double>(i);
  return radius_control[i] + f * (radius_control[i + 1] - radius_control[i]);
}

double PhantomSpec::wall_radius(double t, double theta) const {
  if (bump_amplitude == 0.0) return base_radius(t);
  const BumpPhases phases = bump_phases(*this);
  const int lobes = std::max(1, static_cast<int>(std::lround(bump_frequency)));
  return base_radius(t) +
         bump_amplitude *
             std::sin(2.0 * kPi * bump_frequency * t + phases.axial) *
             std::cos(lobes * theta + phases.angular);
}

TriangleMesh generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const int na = spec.axial_segments;
  const int nt = spec.angular_segments;

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(na + 1) * nt + 2);

  for (int i = 0; i <= na; ++i) {
    const double t = static_cast<double>(i) / na;
    Vec3 n1, n2, tangent;
    axis_frame(spec, t, &n1, &n2, &tangent);
    const Vec3 center = spec.axis_point(t);
    for (int j = 0; j < nt; ++j) {
      const double theta = 2.0 * kPi * j / nt;
      const double r = spec.wall_radius(t, theta);
      mesh.vertices.push_back(center +
                              r * (std::cos(theta) * n1 + std::sin(theta) * n2));
    }
  }
  const std::uint32_t start_center =
      static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(spec.axis_point(0.0));
  const std::uint32_t end_center = start_center + 1;
  mesh.vertices.push_back(spec.axis_point(1.0));

  const auto ring = [nt](int i, int j) {
    return static_cast<std::uint32_t>(i * nt + (j % nt));
  };

  // Side wall, wound so the normals face the cavity interior.
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nt; ++j) {
      const std::uint32_t a = ring(i, j);
      const std::uint32_t b = ring(i, j + 1);
      const std::uint32_t c = ring(i + 1, j + 1);
      const std::uint32_t d = ring(i + 1, j);
      mesh.triangles.push_back({a, d, c});
      mesh.triangles.push_back({a, c, b});
    }
  }
  // End caps, normals toward the interior.
  for (int j = 0; j < nt; ++j) {
    mesh.triangles.push_back({start_center, ring(0, j), ring(0, j + 1)});
    mesh.triangles.push_back({end_center, ring(na, j + 1), ring(na, j)});
  }

  mesh.colors.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) mesh.colors.push_back(texture_color(v));
  return mesh;
}

namespace {

double smoothstep01(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace

std::vector<RigidPose> generate_trajectory(const PhantomSpec& spec,
                                           int n_frames) {
  spec.validate();
  if (n_frames < 2)
    throw InvalidSpec("generate_trajectory: need at least 2 frames");

  std::mt19937_64 rng(derive_seed(spec.seed, "trajectory"));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double spin_phase = phase(rng);
  const double tilt_phase = phase(rng);
  const double offset_phase = phase(rng);
  constexpr double kOffsetFraction = 0.2;
  constexpr double kAxialLo = 0.1, kAxialHi = 0.9;
  constexpr double kSpinTurns = 4.0;

  std::vector<RigidPose> poses;
  poses.reserve(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    const double u = static_cast<double>(i) / (n_frames - 1);
    const double t = kAxialLo + (kAxialHi - kAxialLo) * u;
    Vec3 n1, n2, tangent;
    axis_frame(spec, t, &n1, &n2, &tangent);

    // Lateral offset vanishes at the endpoints, where the camera sits on
    // the axis looking exactly along it.
    const double env = std::sin(kPi * u);
    const double local_r = spec.base_radius(t) - spec.bump_amplitude;
    const Vec3 offset = env * kOffsetFraction * local_r *
                        (std::cos(2.0 * kPi * u + offset_phase) * n1 +
                         std::sin(2.0 * kPi * u + offset_phase) * n2);

    // Spiral inspection: the optical axis tilts off the tube axis by gamma
    // while its azimuth spins, so every wall sector is seen from several
    // non-grazing directions. An early bump to gamma = pi turns the view
    // back onto the entry cap; both endpoints look straight along the axis.
    const double backward = smoothstep01(u / 0.1) *
                            (1.0 - smoothstep01((u - 0.12) / 0.12));
    // The cruise tilt swings past sideways so walls behind the camera get
    // revisited from later stations.
    const double cruise =
        env * (1.0 + 0.9 * std::sin(2.0 * kPi * 2.5 * u + tilt_phase));
    const double gamma = backward * kPi + (1.0 - backward) * cruise;
    const double phi = 2.0 * kPi * kSpinTurns * u + spin_phase;

    Eigen::Matrix3d base;
    base.col(0) = n1;
    base.col(1) = n2;
    base.col(2) = tangent;

    RigidPose pose;
    pose.rotation = Quat(base) * Eigen::AngleAxisd(phi, Vec3::UnitZ()) *
                    Eigen::AngleAxisd(gamma, Vec3::UnitY());
    pose.rotation.normalize();
    pose.translation = spec.axis_point(t) + offset;
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace cavrec
