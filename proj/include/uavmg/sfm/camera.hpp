#pragma once

#include <Eigen/Core>

#include "uavmg/geo/pose.hpp"

namespace uavmg {

struct Camera {
  CameraPose pose;
  Intrinsics intrinsics;
};

using CameraJacobian = Eigen::Matrix<double, 2, 6>;  // [d rotation (left increment), d center]
using PointJacobian = Eigen::Matrix<double, 2, 3>;

// Pinhole projection. The camera looks along -z; pixel u grows with camera
// +x, pixel v grows with camera -y. Returns false for non-positive depth.
inline bool project(const Camera& cam, const Vec3& X, Vec2* pixel,
                    CameraJacobian* d_camera = nullptr, PointJacobian* d_point = nullptr) {
  const Mat3& R = cam.pose.rotation.matrix();
  const Vec3 xc = R * (X - cam.pose.translation);
  const double depth = -xc.z();
  if (!(depth > 0)) return false;
  const Intrinsics& in = cam.intrinsics;
  const double fx = in.fx_px();
  const double fy = in.fy_px();
  const double inv = 1.0 / depth;
  *pixel = Vec2(in.cx_px() + fx * xc.x() * inv, in.cy_px() - fy * xc.y() * inv);
  if (d_camera || d_point) {
    // d pixel / d xc
    Eigen::Matrix<double, 2, 3> dp;
    dp << fx * inv, 0, fx * xc.x() * inv * inv,
          0, -fy * inv, -fy * xc.y() * inv * inv;
    if (d_camera) {
      // xc(w) = exp([w]x) R (X - C)  =>  d xc / d w = -[xc]x at w = 0.
      Mat3 skew;
      skew << 0, -xc.z(), xc.y(),
              xc.z(), 0, -xc.x(),
              -xc.y(), xc.x(), 0;
      d_camera->leftCols<3>() = -dp * skew;
      d_camera->rightCols<3>() = -dp * R;
    }
    if (d_point) *d_point = dp * R;
  }
  return true;
}

}  // namespace uavmg
