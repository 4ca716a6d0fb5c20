#include <doctest.h>

#include "cavrec/phantom.hpp"
#include "cavrec/point_mesh.hpp"
#include "cavrec/render.hpp"
#include "helpers.hpp"

using namespace cavrec;

namespace {

PhantomSpec tiny_phantom() {
  PhantomSpec spec;
  spec.length = 60.0;
  spec.radius_control = {10.0, 13.0, 9.0};
  spec.bump_amplitude = 0.8;
  spec.bend_amplitude = 4.0;
  spec.axial_segments = 16;
  spec.angular_segments = 16;
  spec.seed = 23;
  return spec;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("radial view of a cylinder wall reads the radius") {
  PhantomSpec spec = tiny_phantom();
  spec.radius_control = {10.0};
  spec.bump_amplitude = 0.0;
  spec.bend_amplitude = 0.0;
  spec.angular_segments = 256;  // fine enough for a 1e-3 radius check
  spec.axial_segments = 64;
  const TriangleMesh mesh = generate_phantom(spec);

  // Camera on the axis at mid-length, optical axis pointing at the wall.
  RigidPose pose;
  pose.translation = {0.0, 0.0, 30.0};
  pose.rotation = Quat(Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitY()));

  RenderConfig cfg;
  cfg.noise_sigma_rel = 0.0;
  const CameraIntrinsics k = test::test_intrinsics(33, 25);
  const DepthFrame frame = render_depth(mesh, pose, k, cfg);
  // Central pixel ray is perpendicular to the wall.
  const double center = frame.mean[frame.pixel_index(16, 12)];
  CHECK(center == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("rendered depth matches the brute-force intersection scan") {
  const TriangleMesh mesh = generate_phantom(tiny_phantom());
  REQUIRE(mesh.triangles.size() >= 500);
  const auto poses = generate_trajectory(tiny_phantom(), 5);
  const CameraIntrinsics k = test::test_intrinsics(40, 32);
  RenderConfig cfg;
  cfg.noise_sigma_rel = 0.0;

  const DepthFrame frame = render_depth(mesh, poses[2], k, cfg, 2);
  const Eigen::Matrix3d rot = poses[2].rotation.toRotationMatrix();
  for (int v = 0; v < k.height; v += 3) {
    for (int u = 0; u < k.width; u += 3) {
      const Vec3 dir = rot * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const double brute =
          test::brute_raycast(poses[2].translation, dir, mesh);
      const double rendered = frame.mean[frame.pixel_index(u, v)];
      if (std::isinf(brute)) {
        CHECK(rendered == 0.0);
      } else {
        CHECK(std::abs(rendered - brute) < 1e-9);
      }
    }
  }
}

TEST_CASE("noise-free renders are byte-identical and thread-invariant") {
  const TriangleMesh mesh = generate_phantom(tiny_phantom());
  const auto poses = generate_trajectory(tiny_phantom(), 3);
  const CameraIntrinsics k = test::test_intrinsics(48, 36);
  RenderConfig cfg;
  cfg.noise_sigma_rel = 0.0;
  const DepthFrame a = render_depth(mesh, poses[1], k, cfg, 1, 1);
  const DepthFrame b = render_depth(mesh, poses[1], k, cfg, 1, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);
  CHECK(a.color == b.color);
}

TEST_CASE("noisy renders are deterministic per seed and frame id") {
  const TriangleMesh mesh = generate_phantom(tiny_phantom());
  const auto poses = generate_trajectory(tiny_phantom(), 3);
  const CameraIntrinsics k = test::test_intrinsics(32, 24);
  RenderConfig cfg;
  cfg.noise_sigma_rel = 0.02;
  cfg.seed = 5;
  const DepthFrame a = render_depth(mesh, poses[1], k, cfg, 1, 1);
  const DepthFrame b = render_depth(mesh, poses[1], k, cfg, 1, 4);
  CHECK(a.mean == b.mean);
  const DepthFrame other_frame = render_depth(mesh, poses[1], k, cfg, 2, 1);
  CHECK(a.mean != other_frame.mean);
  // Reported stddev tracks the noise model with its floor.
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    if (a.mean[i] > 0.0)
      CHECK(a.stddev[i] >= cfg.sigma_floor);
  }
}

TEST_CASE("zero-noise depths unproject onto the mesh") {
  const TriangleMesh mesh = generate_phantom(tiny_phantom());
  const double extent = mesh.extent();
  const auto poses = generate_trajectory(tiny_phantom(), 4);
  const CameraIntrinsics k = test::test_intrinsics(32, 24);
  RenderConfig cfg;
  cfg.noise_sigma_rel = 0.0;
  for (const RigidPose& pose : poses) {
    const DepthFrame frame = render_depth(mesh, pose, k, cfg);
    for (int v = 0; v < k.height; v += 5) {
      for (int u = 0; u < k.width; u += 5) {
        const double d = frame.mean[frame.pixel_index(u, v)];
        if (!(d > 0.0)) continue;
        const Vec3 world =
            pose.to_world(unproject({double(u), double(v)}, d, k));
        CHECK(test::brute_point_mesh(world, mesh) < 1e-6 * extent);
      }
    }
  }
}

TEST_CASE("empty meshes cannot be rendered") {
  RenderConfig cfg;
  CHECK_THROWS_AS(
      render_depth(TriangleMesh{}, RigidPose{}, test::test_intrinsics(), cfg),
      DegenerateMesh);
}

TEST_CASE("sparse samples satisfy their own visibility sets") {
  const PhantomSpec spec = tiny_phantom();
  const TriangleMesh mesh = generate_phantom(spec);
  const auto poses = generate_trajectory(spec, 8);
  const CameraIntrinsics k = test::test_intrinsics(64, 48);
  const SparsePointCloud cloud = sample_sparse(mesh, poses, k, 200, 3);
  REQUIRE(cloud.size() >= 100);

  const MeshBvh bvh(mesh);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.visibility[i].size() >= 2);
    CHECK(bvh.closest(cloud.points[i]).distance < 1e-9);
    for (std::uint32_t f : cloud.visibility[i]) {
      const Vec3 cam = poses[f].to_camera(cloud.points[i]);
      CHECK(cam.z() > 0.0);
      const Vec2 px = project(cam, k);
      CHECK(k.in_bounds(px.x(), px.y()));
    }
  }
}

TEST_CASE("occluded wall behind a bend is never listed visible") {
  PhantomSpec spec = tiny_phantom();
  spec.bend_amplitude = 14.0;  // pronounced bend
  spec.length = 80.0;
  spec.radius_control = {9.0, 9.0, 9.0};
  spec.bump_amplitude = 0.0;
  const TriangleMesh mesh = generate_phantom(spec);
  const auto poses = generate_trajectory(spec, 10);
  const CameraIntrinsics k = test::test_intrinsics(64, 48);
  const SparsePointCloud cloud = sample_sparse(mesh, poses, k, 300, 4);

  const MeshBvh bvh(mesh);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::uint32_t f : cloud.visibility[i]) {
      // Replay the occlusion oracle: first hit from the camera is the point.
      const Vec3 origin = poses[f].center();
      const auto hit = bvh.raycast(origin, cloud.points[i] - origin, 1e-9);
      REQUIRE(hit.has_value());
      CHECK(std::abs(hit->t - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("sparse sampling is deterministic and validates inputs") {
  const PhantomSpec spec = tiny_phantom();
  const TriangleMesh mesh = generate_phantom(spec);
  const auto poses = generate_trajectory(spec, 6);
  const CameraIntrinsics k = test::test_intrinsics(48, 36);
  const SparsePointCloud a = sample_sparse(mesh, poses, k, 100, 9);
  const SparsePointCloud b = sample_sparse(mesh, poses, k, 100, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.points[i] - b.points[i]).norm() == 0.0);
    CHECK(a.visibility[i] == b.visibility[i]);
  }
  CHECK_THROWS_AS(sample_sparse(mesh, poses, k, 0, 1), InvalidSpec);
  // Cameras far outside the cavity see nothing.
  std::vector<RigidPose> far(2);
  far[0].translation = {500, 500, 500};
  far[1].translation = {501, 500, 500};
  CHECK_THROWS_AS(sample_sparse(mesh, far, k, 10, 1), NoVisibleSurface);
}

}  // TEST_SUITE
