#pragma once

#include "cavrec/mesh.hpp"
#include "cavrec/tsdf_volume.hpp"

namespace cavrec {

// Triangulates the tsdf == 0 isosurface over all cubes whose eight corners
// have weight >= min_weight. Vertices are placed by linear interpolation
// along crossed cube edges and welded by exact global edge id; vertex colors
// interpolate the voxel color accumulators. Triangles wind counter-clockwise
// seen from the positive-tsdf side. Throws EmptyVolume for grids with fewer
// than 2 voxels on any axis.
TriangleMesh marching_cubes(const TsdfVolume& vol, double min_weight = 1e-6);

}  // namespace cavrec
