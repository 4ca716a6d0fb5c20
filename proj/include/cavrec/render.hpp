#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cavrec/bvh.hpp"
#include "cavrec/depth_frame.hpp"
#include "cavrec/mesh.hpp"

namespace cavrec {

struct RenderConfig {
  double noise_sigma_rel = 0.01;  // depth noise stddev as a fraction of depth
  double sigma_floor = 1e-3;      // lower bound on the reported stddev
  std::uint64_t seed = 0;
};

// Deterministic procedural wall texture, a smooth function of position.
std::array<std::uint8_t, 3> texture_color(const Vec3& p);

// Ray-casts one depth frame from the pose: per-pixel nearest intersection
// z-depth, multiplicative Gaussian noise on the means, reported stddev
// max(noise_sigma_rel * depth, sigma_floor), color from the wall texture.
// Misses are invalid (mean 0). Noise comes from a counter generator keyed
// by (seed, frame_id, pixel), so the output is identical for any thread
// count. Throws DegenerateMesh.
DepthFrame render_depth(const MeshBvh& bvh, const RigidPose& pose,
                        const CameraIntrinsics& k, const RenderConfig& cfg,
                        int frame_id = 0, int n_threads = 1);
DepthFrame render_depth(const TriangleMesh& mesh, const RigidPose& pose,
                        const CameraIntrinsics& k, const RenderConfig& cfg,
                        int frame_id = 0, int n_threads = 1);

// Uniform surface samples kept only when unoccluded, in-frustum and
// front-facing from at least two poses; the visibility sets index into the
// pose list. Deterministic per seed. Throws NoVisibleSurface when no sample
// qualifies.
SparsePointCloud sample_sparse(const TriangleMesh& mesh,
                               std::span<const RigidPose> poses,
                               const CameraIntrinsics& k, int n_points,
                               std::uint64_t seed);

}  // namespace cavrec
