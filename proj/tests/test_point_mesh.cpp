#include <doctest.h>

#include <random>

#include "cavrec/point_mesh.hpp"
#include "helpers.hpp"

using namespace cavrec;

namespace {

// Bumpy closed mesh with a couple hundred triangles.
TriangleMesh random_blob(std::uint64_t seed, int rings = 10, int segs = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.7, 1.3);
  TriangleMesh mesh;
  mesh.vertices.push_back({0, 0, 1.0});
  for (int i = 1; i < rings; ++i) {
    const double phi = M_PI * i / rings;
    for (int j = 0; j < segs; ++j) {
      const double theta = 2.0 * M_PI * j / segs;
      const double r = radius(rng);
      mesh.vertices.push_back({r * std::sin(phi) * std::cos(theta),
                               r * std::sin(phi) * std::sin(theta),
                               r * std::cos(phi)});
    }
  }
  mesh.vertices.push_back({0, 0, -1.0});
  const auto ring = [&](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * segs + (j % segs));
  };
  for (int j = 0; j < segs; ++j)
    mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i) {
    for (int j = 0; j < segs; ++j) {
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  const std::uint32_t south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  for (int j = 0; j < segs; ++j)
    mesh.triangles.push_back({south, ring(rings - 1, j + 1), ring(rings - 1, j)});
  return mesh;
}

}  // namespace

TEST_SUITE("point_mesh") {

TEST_CASE("mesh vertices have zero distance to their own mesh") {
  const TriangleMesh mesh = random_blob(3);
  const DistanceStats stats = point_to_mesh(mesh.vertices, mesh);
  CHECK(stats.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(stats.max < 1e-12);
}

TEST_CASE("point above a large triangle is at plane height") {
  TriangleMesh mesh;
  mesh.vertices = {{-10, -10, 0}, {10, -10, 0}, {0, 10, 0}};
  mesh.triangles = {{0, 1, 2}};
  const std::vector<Vec3> probe = {{0.3, 0.1, 2.5}};
  const DistanceStats stats = point_to_mesh(probe, mesh);
  CHECK(stats.mean == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("closest point covers vertex and edge regions") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.triangles = {{0, 1, 2}};
  CHECK(point_to_mesh(std::vector<Vec3>{{-1, -1, 0}}, mesh).mean ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(point_to_mesh(std::vector<Vec3>{{0.5, -1, 0}}, mesh).mean ==
        doctest::Approx(1.0));
}

TEST_CASE("bvh matches the brute-force scan") {
  const TriangleMesh mesh = random_blob(5);
  REQUIRE(mesh.triangles.size() >= 180);
  std::mt19937_64 rng(99);
  std::vector<Vec3> points;
  for (int i = 0; i < 1000; ++i) points.push_back(test::random_vec(rng, 2.0));
  const DistanceStats stats = point_to_mesh(points, mesh);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double brute = test::brute_point_mesh(points[i], mesh);
    CHECK(std::abs(stats.per_point[i] - brute) < 1e-9);
  }
}

TEST_CASE("summary statistics are coherent") {
  const DistanceStats stats =
      summarize_distances({4.0, 1.0, 2.0, 3.0, 0.0});
  CHECK(stats.mean == doctest::Approx(2.0));
  CHECK(stats.median == doctest::Approx(2.0));
  CHECK(stats.max == doctest::Approx(4.0));
  CHECK(stats.stddev == doctest::Approx(std::sqrt(2.0)));
  CHECK(stats.mean <= stats.max);
}

TEST_CASE("empty mesh throws") {
  const std::vector<Vec3> probe = {{0, 0, 0}};
  CHECK_THROWS_AS(point_to_mesh(probe, TriangleMesh{}), EmptyMesh);
}

TEST_CASE("raycast agrees with the brute-force scan") {
  const TriangleMesh mesh = random_blob(7);
  const MeshBvh bvh(mesh);
  std::mt19937_64 rng(123);
  for (int i = 0; i < 300; ++i) {
    const Vec3 origin = test::random_vec(rng, 0.2);
    const Vec3 dir = test::random_vec(rng, 1.0).normalized();
    const double brute = test::brute_raycast(origin, dir, mesh);
    const auto hit = bvh.raycast(origin, dir);
    REQUIRE(hit.has_value());  // origin is inside a closed blob
    CHECK(std::abs(hit->t - brute) < 1e-9);
  }
}

}  // TEST_SUITE
