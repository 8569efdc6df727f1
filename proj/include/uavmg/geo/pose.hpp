#pragma once

#include <cmath>
#include <string>

#include "uavmg/geo/rotation.hpp"

namespace uavmg {

// Platform pose at one exposure station. `rotation` maps world (ENU)
// vectors into the body frame; `translation` is the body origin in world
// coordinates, meters.
struct PlatformPose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  // From a navigation attitude (yaw, pitch, roll in degrees) and position.
  static PlatformPose from_attitude(double yaw_deg, double pitch_deg, double roll_deg,
                                    const Vec3& position) {
    if (!position.allFinite()) throw InvalidArgument("platform position must be finite");
    return {rotation_from_euler(yaw_deg, pitch_deg, roll_deg).transpose(), position};
  }
};

// Camera rotation relative to the body frame (body -> camera) plus the
// lever-arm offset expressed in the body frame.
struct CameraMount {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static CameraMount from_angles(double yaw_deg, double pitch_deg, double roll_deg,
                                 const Vec3& lever_arm = Vec3::Zero()) {
    return {rotation_from_euler(yaw_deg, pitch_deg, roll_deg).transpose(), lever_arm};
  }
};

// rotation: world -> camera. translation: projection center in world.
// The camera looks along its local -z axis; image x runs along +x and
// image rows grow along -y.
struct CameraPose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  int camera_id = 0;
  int station_id = 0;

  Vec3 center() const { return translation; }
  Vec3 to_camera(const Vec3& world) const { return rotation * (world - translation); }
  Vec3 optical_axis() const { return rotation.matrix().transpose() * Vec3(0, 0, -1); }
};

inline CameraPose compose_camera_pose(const PlatformPose& platform, const CameraMount& mount,
                                      int camera_id = 0, int station_id = 0) {
  CameraPose pose;
  pose.rotation = mount.rotation * platform.rotation;
  pose.translation = platform.rotation.matrix().transpose() * mount.translation +
                     platform.translation;
  pose.camera_id = camera_id;
  pose.station_id = station_id;
  return pose;
}

struct Intrinsics {
  double focal_length_mm = 0;
  double sensor_width_mm = 0;
  double sensor_height_mm = 0;
  int image_width_px = 0;
  int image_height_px = 0;

  Intrinsics() = default;
  Intrinsics(double focal_mm, double sensor_w_mm, double sensor_h_mm, int width_px,
             int height_px)
      : focal_length_mm(focal_mm),
        sensor_width_mm(sensor_w_mm),
        sensor_height_mm(sensor_h_mm),
        image_width_px(width_px),
        image_height_px(height_px) {
    validate();
  }

  void validate() const {
    if (!(focal_length_mm > 0) || !(sensor_width_mm > 0) || !(sensor_height_mm > 0) ||
        image_width_px <= 0 || image_height_px <= 0) {
      throw InvalidArgument("intrinsics must be strictly positive");
    }
  }

  double pixel_pitch_x_mm() const { return sensor_width_mm / image_width_px; }
  double pixel_pitch_y_mm() const { return sensor_height_mm / image_height_px; }
  double fx_px() const { return focal_length_mm / pixel_pitch_x_mm(); }
  double fy_px() const { return focal_length_mm / pixel_pitch_y_mm(); }
  double cx_px() const { return 0.5 * image_width_px; }
  double cy_px() const { return 0.5 * image_height_px; }

  // Pixel pitches on the two axes disagree by more than 5%.
  bool anisotropic_pitch() const {
    const double px = pixel_pitch_x_mm();
    const double py = pixel_pitch_y_mm();
    return std::abs(px - py) > 0.05 * std::max(px, py);
  }
};

}  // namespace uavmg
