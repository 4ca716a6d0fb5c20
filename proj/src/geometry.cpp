#include "cavrec/geometry.hpp"

#include <cmath>

namespace cavrec {

void CameraIntrinsics::validate() const {
  if (fx <= 0.0 || fy <= 0.0)
    throw InvalidSpec("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw InvalidSpec("intrinsics: image size must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw InvalidSpec("intrinsics: principal point outside the image");
}

Vec2 project(const Vec3& point_cam, const CameraIntrinsics& k) {
  if (!(point_cam.z() > 0.0))
    throw NonPositiveDepth("project: point has non-positive depth");
  const double inv_z = 1.0 / point_cam.z();
  return {k.fx * point_cam.x() * inv_z + k.cx,
          k.fy * point_cam.y() * inv_z + k.cy};
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0.0))
    throw NonPositiveDepth("unproject: non-positive depth");
  return {(pixel.x() - k.cx) / k.fx * depth,
          (pixel.y() - k.cy) / k.fy * depth, depth};
}

RigidPose RigidPose::compose(const RigidPose& rhs) const {
  RigidPose out;
  out.rotation = (rotation * rhs.rotation).normalized();
  out.translation = rotation * rhs.translation + translation;
  return out;
}

RigidPose RigidPose::inverse() const {
  RigidPose out;
  out.rotation = rotation.conjugate();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidPose::is_finite() const {
  return translation.allFinite() && rotation.coeffs().allFinite() &&
         std::abs(rotation.norm() - 1.0) < 1e-6;
}

RigidPose SimilarityTransform::apply(const RigidPose& pose) const {
  RigidPose out;
  out.rotation = (rotation * pose.rotation).normalized();
  out.translation = apply(pose.translation);
  return out;
}

SimilarityTransform SimilarityTransform::compose(
    const SimilarityTransform& rhs) const {
  SimilarityTransform out;
  out.scale = scale * rhs.scale;
  out.rotation = (rotation * rhs.rotation).normalized();
  out.translation = apply(rhs.translation);
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform out;
  out.scale = 1.0 / scale;
  out.rotation = rotation.conjugate();
  out.translation = -(out.rotation * translation) * out.scale;
  return out;
}

}  // namespace cavrec
