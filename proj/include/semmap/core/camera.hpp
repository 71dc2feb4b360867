#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "semmap/core/error.hpp"

namespace semmap {

using Point3 = Eigen::Vector3d;

// Pinhole intrinsics without distortion, in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void Validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) ||
        !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "camera intrinsics require finite fx > 0 and fy > 0");
    }
  }
};

// Camera-to-world rigid transform: X_world = rotation * X_cam + translation.
class CameraPose {
 public:
  static constexpr double kRotationTolerance = 1e-9;

  CameraPose() = default;

  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {
    const double orth =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff();
    const double det = rotation.determinant();
    if (!(orth <= kRotationTolerance) ||
        !(std::abs(det - 1.0) <= kRotationTolerance) ||
        !translation.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pose rotation is not a proper rotation (orthogonality error " +
                      std::to_string(orth) + ", det " + std::to_string(det) +
                      ")");
    }
  }

  static CameraPose Identity() { return {}; }

  static CameraPose Translation(const Eigen::Vector3d& t) {
    return CameraPose(Eigen::Matrix3d::Identity(), t);
  }

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& translation() const noexcept { return translation_; }

  CameraPose Inverse() const {
    CameraPose inv;
    inv.rotation_ = rotation_.transpose();
    inv.translation_ = -(inv.rotation_ * translation_);
    return inv;
  }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

struct PixelDepth {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

inline Point3 BackProject(double u, double v, double depth,
                          const CameraIntrinsics& k) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "back-projection needs a finite positive depth, got " +
                    std::to_string(depth));
  }
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

inline PixelDepth Project(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::kBehindCamera,
                "point has z = " + std::to_string(p.z()));
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

inline Point3 TransformToWorld(const Point3& p, const CameraPose& pose) {
  return pose.rotation() * p + pose.translation();
}

inline Point3 TransformToCamera(const Point3& p, const CameraPose& pose) {
  return pose.rotation().transpose() * (p - pose.translation());
}

}  // namespace semmap
