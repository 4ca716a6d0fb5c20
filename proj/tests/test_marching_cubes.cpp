#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavrec/marching_cubes.hpp"
#include "cavrec/point_mesh.hpp"
#include "helpers.hpp"

using namespace cavrec;

namespace {

// Grid sampling of an analytic signed distance field, fully weighted.
template <typename Field>
TsdfVolume sample_sdf(const Vec3& origin, double voxel, int nx, int ny, int nz,
                      Field&& field) {
  TsdfVolume vol(origin, voxel, nx, ny, nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        vol.set_voxel(vol.index(i, j, k),
                      static_cast<float>(field(vol.voxel_center(i, j, k))),
                      1.0f);
  return vol;
}

}  // namespace

TEST_SUITE("marching_cubes") {

TEST_CASE("all-positive volume yields an empty mesh") {
  TsdfVolume vol({0, 0, 0}, 1.0, 4, 4, 4);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i)
    vol.set_voxel(i, 1.0f, 1.0f);
  CHECK(marching_cubes(vol).empty());
}

TEST_CASE("degenerate grids are rejected") {
  CHECK_THROWS_AS(marching_cubes(TsdfVolume({0, 0, 0}, 1.0, 1, 4, 4)),
                  EmptyVolume);
}

TEST_CASE("analytic unit sphere: area, volume, watertight") {
  const int n = 64;
  const double extent = 2.4;
  const double voxel = extent / (n - 1);
  const TsdfVolume vol =
      sample_sdf({-extent / 2, -extent / 2, -extent / 2}, voxel, n, n, n,
                 [&](const Vec3& p) {
                   return std::clamp((p.norm() - 1.0) / (10.0 * voxel), -1.0,
                                     1.0);
                 });
  const TriangleMesh mesh = marching_cubes(vol);
  REQUIRE_FALSE(mesh.empty());

  const double area = mesh.surface_area();
  const double volume = mesh.signed_volume();
  CHECK(std::abs(area - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi) <
        0.02);
  CHECK(std::abs(volume - 4.0 * std::numbers::pi / 3.0) /
            (4.0 * std::numbers::pi / 3.0) <
        0.02);
  CHECK(volume > 0.0);  // wound counter-clockwise from the positive side

  const WatertightReport report = check_watertight(mesh);
  CHECK(report.is_watertight);
  CHECK(report.boundary_edge_count == 0);
  CHECK(report.non_manifold_edge_count == 0);
  CHECK(test::orientation_consistent(mesh));

  // Every vertex sits on the zero level set of the exact field.
  for (const Vec3& v : mesh.vertices)
    CHECK(std::abs(v.norm() - 1.0) < voxel);
}

TEST_CASE("analytic plane: vertices exact, normals follow the gradient") {
  const int n = 20;
  const double voxel = 0.1;
  const Vec3 normal = Vec3(0.3, 0.5, 0.8).normalized();
  const double offset = 0.537;
  const TsdfVolume vol =
      sample_sdf({-1, -1, -1}, voxel, n, n, n,
                 [&](const Vec3& p) { return normal.dot(p) - offset + 0.0131; });
  const TriangleMesh mesh = marching_cubes(vol);
  REQUIRE_FALSE(mesh.empty());
  const double extent = mesh.extent();
  for (const Vec3& v : mesh.vertices)
    CHECK(std::abs(normal.dot(v) - offset + 0.0131) < 1e-6 * extent);
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t)
    CHECK(mesh.triangle_normal(t).dot(normal) > 0.0);
  CHECK(test::orientation_consistent(mesh));
}

TEST_CASE("mesh is invariant under positive tsdf scaling") {
  const int n = 12;
  const TsdfVolume base =
      sample_sdf({-1, -1, -1}, 2.0 / (n - 1), n, n, n,
                 [&](const Vec3& p) { return p.norm() - 0.8; });
  TsdfVolume scaled({-1, -1, -1}, 2.0 / (n - 1), n, n, n);
  for (std::size_t i = 0; i < base.voxel_count(); ++i)
    scaled.set_voxel(i, 4.0f * base.tsdf_at(i), 1.0f);

  const TriangleMesh a = marching_cubes(base);
  const TriangleMesh b = marching_cubes(scaled);
  REQUIRE(a.vertices.size() == b.vertices.size());
  REQUIRE(a.triangles.size() == b.triangles.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i)
    CHECK((a.vertices[i] - b.vertices[i]).norm() < 1e-9);
  for (std::size_t i = 0; i < a.triangles.size(); ++i)
    CHECK(a.triangles[i] == b.triangles[i]);
}

TEST_CASE("cubes with unobserved corners are skipped and reported open") {
  const int n = 8;
  TsdfVolume vol = sample_sdf({-1, -1, -1}, 2.0 / (n - 1), n, n, n,
                              [&](const Vec3& p) { return p.x() - 0.1; });
  // Mask one voxel column as unobserved next to the zero crossing.
  for (int k = 0; k < n; ++k) vol.set_voxel(vol.index(4, 3, k), 1.0f, 0.0f);
  const TriangleMesh mesh = marching_cubes(vol);
  REQUIRE_FALSE(mesh.empty());
  CHECK(check_watertight(mesh).boundary_edge_count > 0);
}

// Exhaustive conformity: every pair of adjacent sign configurations meshes
// without a crack on the shared face, on all three axes.
TEST_CASE("two-cube conformity over all 4096 configurations per axis") {
  for (int axis = 0; axis < 3; ++axis) {
    const int nx = axis == 0 ? 3 : 2;
    const int ny = axis == 1 ? 3 : 2;
    const int nz = axis == 2 ? 3 : 2;
    const int n_corners = nx * ny * nz;
    REQUIRE(n_corners == 12);
    for (int config = 0; config < (1 << 12); ++config) {
      TsdfVolume vol({0, 0, 0}, 1.0, nx, ny, nz);
      for (int c = 0; c < n_corners; ++c)
        vol.set_voxel(static_cast<std::size_t>(c),
                      (config >> c) & 1 ? -1.0f : 1.0f, 1.0f);
      const TriangleMesh mesh = marching_cubes(vol);
      CHECK(test::orientation_consistent(mesh));

      const WatertightReport report = check_watertight(mesh);
      if (report.boundary_edge_count == 0) continue;
      // Boundary edges are only legitimate on the domain boundary, never
      // strictly inside the shared face at coordinate 1 along the axis.
      std::unordered_map<std::uint64_t, int> incidence;
      for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
          const std::uint64_t a = std::min(t[e], t[(e + 1) % 3]);
          const std::uint64_t b = std::max(t[e], t[(e + 1) % 3]);
          ++incidence[(a << 32) | b];
        }
      }
      for (const auto& [key, count] : incidence) {
        if (count != 1) continue;
        const Vec3 mid = 0.5 * (mesh.vertices[key >> 32] +
                                mesh.vertices[key & 0xffffffffu]);
        const bool inside_shared_face =
            std::abs(mid[axis] - 1.0) < 1e-9 &&
            mid[(axis + 1) % 3] > 1e-9 && mid[(axis + 1) % 3] < 1.0 - 1e-9 &&
            mid[(axis + 2) % 3] > 1e-9 && mid[(axis + 2) % 3] < 1.0 - 1e-9;
        CHECK_FALSE(inside_shared_face);
      }
    }
  }
}

TEST_CASE("vertex colors interpolate the voxel accumulators") {
  TsdfVolume vol({0, 0, 0}, 1.0, 2, 2, 2);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) {
    const bool low = i % 2 == 0;  // x == 0 plane
    vol.set_voxel(i, low ? -0.5f : 0.5f, 1.0f,
                  low ? std::array<float, 3>{100, 0, 0}
                      : std::array<float, 3>{200, 0, 0});
  }
  const TriangleMesh mesh = marching_cubes(vol);
  REQUIRE_FALSE(mesh.empty());
  REQUIRE(mesh.has_colors());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK(mesh.vertices[i].x() == doctest::Approx(0.5));
    CHECK(static_cast<int>(mesh.colors[i][0]) == 150);
  }
}

}  // TEST_SUITE
