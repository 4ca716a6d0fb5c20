#pragma once

#include <span>

#include "cavrec/point_mesh.hpp"

namespace cavrec {

struct RegistrationConfig {
  int max_iters = 100;
  double trim_fraction = 0.1;  // worst correspondences dropped per iteration
  // Convergence threshold on the change of the mean trimmed residual;
  // negative selects 1e-7 * target extent.
  double tol = -1.0;
};

struct RegistrationResult {
  SimilarityTransform transform;
  DistanceStats residuals;  // point-to-mesh stats of all transformed points
  bool converged = false;
  int iterations = 0;
  double trimmed_mean = 0.0;  // final mean residual on the kept set
};

// Trimmed iterative-closest-point alignment of a point set onto a mesh over
// a similarity transform: closest-point correspondences, the best
// (1 - trim_fraction) kept by distance, then a closed-form SVD similarity
// fit, iterated to convergence. Needs at least 7 source points (7 DOF);
// throws TooFewPoints / EmptyMesh. Non-convergence is reported in the
// result, not thrown.
RegistrationResult register_sim3(std::span<const Vec3> source,
                                 const TriangleMesh& target,
                                 const SimilarityTransform& init,
                                 const RegistrationConfig& cfg = {});

// Centroid + RMS-radius alignment, the pipeline's coarse initializer.
SimilarityTransform coarse_init(std::span<const Vec3> source,
                                const TriangleMesh& target);

}  // namespace cavrec
