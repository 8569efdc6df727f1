#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "uavmg/errors.hpp"

namespace uavmg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Orthonormal 3x3 matrix with det +1. Construction validates to 1e-9.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}

  explicit Rotation(const Mat3& m) : m_(m) {
    if (!m.allFinite()) throw InvalidArgument("rotation has non-finite entries");
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > kTolerance ||
        std::abs(m.determinant() - 1.0) > kTolerance) {
      throw InvalidArgument("matrix is not a proper rotation");
    }
  }

  static Rotation identity() { return Rotation(); }

  // Rodrigues; used for minimal local updates in bundle adjustment.
  static Rotation exp(const Vec3& omega) {
    const double theta = omega.norm();
    if (theta < 1e-300) return Rotation();
    Rotation r;
    r.m_ = Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
    return r;
  }

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return unchecked(m_.transpose()); }

  Rotation operator*(const Rotation& o) const { return unchecked(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool operator==(const Rotation& o) const { return m_ == o.m_; }

 private:
  static Rotation unchecked(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

  Mat3 m_;
};

enum class EulerConvention {
  // R = Rz(yaw) * Ry(pitch) * Rx(roll), right-handed, ENU.
  kZYX,
};

// Attitude matrix: maps vectors of the rotated frame into the parent frame.
inline Rotation rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg,
                                    EulerConvention convention = EulerConvention::kZYX) {
  if (!std::isfinite(yaw_deg) || !std::isfinite(pitch_deg) || !std::isfinite(roll_deg)) {
    throw InvalidArgument("euler angles must be finite");
  }
  (void)convention;
  const Eigen::AngleAxisd rz(yaw_deg * kDegToRad, Vec3::UnitZ());
  const Eigen::AngleAxisd ry(pitch_deg * kDegToRad, Vec3::UnitY());
  const Eigen::AngleAxisd rx(roll_deg * kDegToRad, Vec3::UnitX());
  return Rotation((rz * ry * rx).toRotationMatrix());
}

}  // namespace uavmg
