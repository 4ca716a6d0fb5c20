#include <doctest.h>

#include <numbers>
#include <random>

#include "cavrec/cross_section.hpp"
#include "cavrec/phantom.hpp"
#include "helpers.hpp"

using namespace cavrec;

namespace {

PhantomSpec cylinder_spec(double radius = 10.0, double length = 60.0) {
  PhantomSpec spec;
  spec.length = length;
  spec.radius_control = {radius};
  spec.bump_amplitude = 0.0;
  spec.bend_amplitude = 0.0;
  spec.axial_segments = 32;
  spec.angular_segments = 64;
  return spec;
}

RigidPose axis_pose(double z) {
  RigidPose pose;  // identity looks along +z, the cylinder axis
  pose.translation = {0.0, 0.0, z};
  return pose;
}

TriangleMesh unit_cube() {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                   {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  mesh.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                    {0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5},
                    {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return mesh;
}

}  // namespace

TEST_SUITE("cross_section") {

TEST_CASE("cylinder section area approaches pi r^2") {
  const double r = 10.0;
  const TriangleMesh mesh = generate_phantom(cylinder_spec(r));
  const CrossSection section = cross_section(mesh, axis_pose(30.0));
  const double expected = std::numbers::pi * r * r;
  CHECK(std::abs(section.area - expected) / expected < 0.01);
  CHECK(section.contour.size() >= 65);  // 64 segments, closed
  CHECK((section.contour.front() - section.contour.back()).norm() == 0.0);
}

TEST_CASE("unit cube mid-plane has area one") {
  RigidPose pose;
  pose.translation = {0.5, 0.5, 0.5};
  const CrossSection section = cross_section(unit_cube(), pose);
  CHECK(section.area == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("plane missing the mesh raises NoIntersection") {
  CHECK_THROWS_AS(cross_section(unit_cube(), axis_pose(5.0)), NoIntersection);
  CHECK_THROWS_AS(cross_section(TriangleMesh{}, axis_pose(0.0)), EmptyMesh);
}

TEST_CASE("area is invariant under joint rigid motion") {
  const TriangleMesh mesh = generate_phantom(cylinder_spec());
  const RigidPose pose = axis_pose(25.0);
  const double base = cross_section(mesh, pose).area;

  std::mt19937_64 rng(31);
  for (int i = 0; i < 5; ++i) {
    SimilarityTransform motion;
    motion.rotation = test::random_rotation(rng);
    motion.translation = test::random_vec(rng, 30.0);
    const TriangleMesh moved = transformed(mesh, motion);
    const RigidPose moved_pose = motion.apply(pose);
    CHECK(cross_section(moved, moved_pose).area ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("area scales quadratically under joint scaling") {
  const TriangleMesh mesh = generate_phantom(cylinder_spec());
  const RigidPose pose = axis_pose(25.0);
  const double base = cross_section(mesh, pose).area;
  SimilarityTransform scaling;
  scaling.scale = 1.7;
  const TriangleMesh scaled = transformed(mesh, scaling);
  CHECK(cross_section(scaled, scaling.apply(pose)).area ==
        doctest::Approx(1.7 * 1.7 * base).epsilon(1e-9));
}

TEST_CASE("camera-containing loop is selected among several") {
  // Two nested cylinders as one mesh: the camera sits inside the inner one.
  const TriangleMesh inner = generate_phantom(cylinder_spec(5.0));
  const TriangleMesh outer = generate_phantom(cylinder_spec(15.0));
  TriangleMesh both = inner;
  const std::uint32_t base =
      static_cast<std::uint32_t>(both.vertices.size());
  both.vertices.insert(both.vertices.end(), outer.vertices.begin(),
                       outer.vertices.end());
  both.colors.clear();
  for (const auto& t : outer.triangles)
    both.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});

  const CrossSection section = cross_section(both, axis_pose(30.0));
  CHECK(std::abs(section.area - std::numbers::pi * 25.0) /
            (std::numbers::pi * 25.0) <
        0.01);
}

TEST_CASE("series of identical meshes has zero relative difference") {
  const TriangleMesh mesh = generate_phantom(cylinder_spec());
  std::vector<RigidPose> poses;
  for (double z : {15.0, 25.0, 35.0, 45.0}) poses.push_back(axis_pose(z));
  const SectionSeriesResult series =
      cross_section_series(mesh, mesh, poses, SimilarityTransform{});
  CHECK(series.mean_relative_difference == doctest::Approx(0.0));
  CHECK(series.valid_count == 4);
  CHECK(series.skipped_count == 0);
}

TEST_CASE("uniformly scaled reconstruction differs by s^2 - 1") {
  const TriangleMesh reference = generate_phantom(cylinder_spec());
  SimilarityTransform scaling;
  scaling.scale = 1.1;
  const TriangleMesh recon = transformed(reference, scaling);
  std::vector<RigidPose> poses;
  for (double z : {20.0, 30.0, 40.0}) poses.push_back(axis_pose(z));
  const SectionSeriesResult series =
      cross_section_series(recon, reference, poses, SimilarityTransform{});
  CHECK(std::abs(series.mean_relative_difference - 0.21) < 1e-6);
  CHECK(series.valid_count == 3);
}

TEST_CASE("poses outside the mesh are skipped and counted") {
  const TriangleMesh mesh = generate_phantom(cylinder_spec());
  std::vector<RigidPose> poses = {axis_pose(30.0), axis_pose(500.0)};
  const SectionSeriesResult series =
      cross_section_series(mesh, mesh, poses, SimilarityTransform{});
  CHECK(series.valid_count == 1);
  CHECK(series.skipped_count == 1);

  std::vector<RigidPose> all_bad = {axis_pose(500.0)};
  CHECK_THROWS_AS(
      cross_section_series(mesh, mesh, all_bad, SimilarityTransform{}),
      AllSectionsFailed);
}

}  // TEST_SUITE
