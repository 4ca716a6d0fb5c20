#pragma once

#include <filesystem>

#include "cavrec/depth_frame.hpp"
#include "cavrec/mesh.hpp"

namespace cavrec {

// Binary little-endian PLY with x y z (float), red green blue (uchar, when
// the mesh has colors) and uint32 face indices.
void write_mesh_ply(const std::filesystem::path& path,
                    const TriangleMesh& mesh);

// Reads ASCII or binary little-endian PLY. Positions are required, colors
// optional; unknown properties are skipped. Throws IoError.
TriangleMesh read_mesh_ply(const std::filesystem::path& path);

// ASCII PLY of landmark positions with a per-point list of observing frame
// ids (property list uint uint visibility).
void write_sparse_cloud_ply(const std::filesystem::path& path,
                            const SparsePointCloud& cloud);
SparsePointCloud read_sparse_cloud_ply(const std::filesystem::path& path);

}  // namespace cavrec
