#pragma once

#include <cmath>

#include "uavmg/geo/rotation.hpp"

namespace uavmg {

struct Geodetic {
  double lat_deg = 0;
  double lon_deg = 0;
  double height_m = 0;
};

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccSq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

inline Vec3 geodetic_to_ecef(const Geodetic& g) {
  if (!(std::abs(g.lat_deg) <= 90.0) || !std::isfinite(g.lon_deg) || !std::isfinite(g.height_m)) {
    throw InvalidArgument("invalid geodetic coordinate");
  }
  const double lat = g.lat_deg * kDegToRad;
  const double lon = g.lon_deg * kDegToRad;
  const double s = std::sin(lat);
  const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEccSq * s * s);
  return {(n + g.height_m) * std::cos(lat) * std::cos(lon),
          (n + g.height_m) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - wgs84::kEccSq) + g.height_m) * s};
}

// East-north-up tangent frame at `origin`.
inline Vec3 geodetic_to_local(const Geodetic& point, const Geodetic& origin) {
  const Vec3 d = geodetic_to_ecef(point) - geodetic_to_ecef(origin);
  const double lat = origin.lat_deg * kDegToRad;
  const double lon = origin.lon_deg * kDegToRad;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  return {-so * d.x() + co * d.y(),
          -sl * co * d.x() - sl * so * d.y() + cl * d.z(),
          cl * co * d.x() + cl * so * d.y() + sl * d.z()};
}

}  // namespace uavmg
