#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cavrec/errors.hpp"

namespace cavrec {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// Pinhole camera. Pixel coordinates are continuous with integer coordinates
// at pixel centers; (0,0) is the center of the top-left pixel.
struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  // True if (u,v) rounds to a pixel inside the image.
  bool in_bounds(double u, double v) const {
    return u >= -0.5 && u < width - 0.5 && v >= -0.5 && v < height - 0.5;
  }

  // Throws InvalidSpec when focal lengths or the principal point are out of
  // range for the image size.
  void validate() const;
};

// Projects a camera-frame point onto the image plane.
// Throws NonPositiveDepth for z <= 0.
Vec2 project(const Vec3& point_cam, const CameraIntrinsics& k);

// Lifts a pixel at the given z-depth back into the camera frame.
// Throws NonPositiveDepth for depth <= 0.
Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k);

// Camera-to-world rigid pose.
struct RigidPose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_world(const Vec3& p_cam) const {
    return rotation * p_cam + translation;
  }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation.conjugate() * (p_world - translation);
  }
  // World direction of the camera +z axis.
  Vec3 optical_axis() const { return rotation * Vec3::UnitZ(); }
  Vec3 center() const { return translation; }

  // this * rhs: applies rhs first. Renormalizes the quaternion.
  RigidPose compose(const RigidPose& rhs) const;
  RigidPose inverse() const;
  bool is_finite() const;
};

// Scale + rotation + translation (7 DOF): p -> scale * R * p + t.
struct SimilarityTransform {
  double scale = 1.0;
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const {
    return scale * (rotation * p) + translation;
  }
  // Maps a camera pose into the target frame (scale does not affect the
  // rotation part).
  RigidPose apply(const RigidPose& pose) const;
  SimilarityTransform compose(const SimilarityTransform& rhs) const;
  SimilarityTransform inverse() const;
};

}  // namespace cavrec
