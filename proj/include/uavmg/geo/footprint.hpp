#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "uavmg/geo/polygon.hpp"
#include "uavmg/geo/pose.hpp"

namespace uavmg {

struct Footprint {
  ConvexPolygon polygon;
  Vec2 center;             // polygon centroid on the elevation plane
  Vec3 projection_center;  // camera center
  Vec3 view_direction;     // unit, projection center -> (center, elevation)
  double elevation = 0;
};

// Intersects the four image-corner rays with the plane z = elevation.
inline Footprint project_footprint(const CameraPose& pose, const Intrinsics& intr,
                                   double elevation) {
  const Vec3 c = pose.center();
  if (!(c.z() > elevation)) {
    throw DegenerateGeometry("camera is not above the elevation plane");
  }
  const double hw = 0.5 * intr.sensor_width_mm;
  const double hh = 0.5 * intr.sensor_height_mm;
  const double f = intr.focal_length_mm;
  const Mat3 cam_to_world = pose.rotation.matrix().transpose();
  const std::array<Vec3, 4> corners = {Vec3(-hw, -hh, -f), Vec3(hw, -hh, -f),
                                       Vec3(hw, hh, -f), Vec3(-hw, hh, -f)};
  std::array<Vec2, 4> ground;
  for (std::size_t k = 0; k < corners.size(); ++k) {
    const Vec3 d = cam_to_world * corners[k];
    // Rays at or above the horizon never reach the plane.
    if (!(d.z() < -1e-12 * d.norm())) {
      throw HorizonClip("image corner ray does not hit the elevation plane");
    }
    const double t = (elevation - c.z()) / d.z();
    ground[k] = (c + t * d).head<2>();
  }
  ConvexPolygon poly = convex_hull(ground);
  const Vec2 center = poly.centroid();
  const Vec3 dir = (Vec3(center.x(), center.y(), elevation) - c).normalized();
  return Footprint{std::move(poly), center, c, dir, elevation};
}

struct OverlapExtent {
  double wo = 0;
  double ho = 0;
  double wt = 0;
  double ht = 0;
};

inline OverlapExtent overlap_extent(const Footprint& target, const Footprint& neighbor) {
  OverlapExtent e;
  const Envelope te = target.polygon.envelope();
  e.wt = te.width();
  e.ht = te.height();
  const Intersection inter = convex_intersection(target.polygon, neighbor.polygon);
  if (inter.polygon) {
    const Envelope oe = inter.polygon->envelope();
    e.wo = oe.width();
    e.ho = oe.height();
  }
  return e;
}

// Angle between the two view directions, degrees in [0, 180].
inline double intersection_angle(const Footprint& a, const Footprint& b) {
  const double c = std::clamp(a.view_direction.dot(b.view_direction), -1.0, 1.0);
  return std::acos(c) * kRadToDeg;
}

// Half-open wedges: Q1 dx>0,dy>=0; Q2 dx<=0,dy>0; Q3 dx<0,dy<=0; Q4 dx>=0,dy<0.
inline int quadrant_of(const Vec2& target_center, const Vec2& neighbor_center) {
  const Vec2 d = neighbor_center - target_center;
  if (!(d.norm() > 1e-9)) throw InvalidArgument("coincident footprint centers");
  const double dx = d.x();
  const double dy = d.y();
  if (dx > 0 && dy >= 0) return 1;
  if (dx <= 0 && dy > 0) return 2;
  if (dx < 0 && dy <= 0) return 3;
  return 4;
}

}  // namespace uavmg
