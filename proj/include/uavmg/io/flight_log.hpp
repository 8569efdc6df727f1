#pragma once

#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "uavmg/geo/geodetic.hpp"
#include "uavmg/io/csv.hpp"
#include "uavmg/simulator.hpp"

namespace uavmg::io {

struct FlightLogRecord {
  std::string image_id;
  std::string camera_id;
  double x = 0, y = 0, z = 0;  // local ENU meters after parsing
  double yaw_deg = 0, pitch_deg = 0, roll_deg = 0;

  bool operator==(const FlightLogRecord&) const = default;
};

inline const std::vector<std::string>& flight_log_columns() {
  static const std::vector<std::string> cols = {"image_id", "camera_id", "x",        "y",
                                                "z",        "yaw_deg",   "pitch_deg", "roll_deg"};
  return cols;
}

// With a `# frame=geodetic` line before the header, x/y/z are longitude,
// latitude (degrees) and ellipsoidal height; they are converted to ENU about
// the first record's longitude/latitude on the ellipsoid, so z stays a height.
inline std::vector<FlightLogRecord> parse_flight_log(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(flight_log_columns());
  bool geodetic = false;
  for (const auto& c : reader.comments()) {
    if (c.find("frame=geodetic") != std::string::npos) geodetic = true;
  }
  std::vector<FlightLogRecord> out;
  std::set<std::string> ids;
  std::vector<std::size_t> lines;
  CsvRow row;
  while (reader.next_record(row)) {
    FlightLogRecord r;
    r.image_id = reader.text(row, 0);
    r.camera_id = reader.text(row, 1);
    r.x = reader.number(row, 2);
    r.y = reader.number(row, 3);
    r.z = reader.number(row, 4);
    r.yaw_deg = reader.number(row, 5);
    r.pitch_deg = reader.number(row, 6);
    r.roll_deg = reader.number(row, 7);
    if (!ids.insert(r.image_id).second) {
      throw DuplicateKey(source + ":" + std::to_string(row.line) + ": duplicate image_id '" +
                         r.image_id + "'");
    }
    out.push_back(std::move(r));
    lines.push_back(row.line);
  }
  if (geodetic && !out.empty()) {
    const Geodetic origin{out.front().y, out.front().x, 0.0};
    for (std::size_t k = 0; k < out.size(); ++k) {
      auto& r = out[k];
      if (!(std::abs(r.y) <= 90.0)) throw ParseError(source, lines[k], 4, "latitude out of range");
      const Vec3 p = geodetic_to_local({r.y, r.x, r.z}, origin);
      r.x = p.x();
      r.y = p.y();
      r.z = p.z();
    }
  }
  return out;
}

inline std::vector<FlightLogRecord> parse_flight_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_flight_log(in, path);
}

inline void write_flight_log(std::ostream& out, const std::vector<FlightLogRecord>& records) {
  out << join_header(flight_log_columns()) << '\n';
  for (const auto& r : records) {
    out << r.image_id << ',' << r.camera_id << ',' << format_exact(r.x) << ',' << format_exact(r.y)
        << ',' << format_exact(r.z) << ',' << format_exact(r.yaw_deg) << ','
        << format_exact(r.pitch_deg) << ',' << format_exact(r.roll_deg) << '\n';
  }
}

inline std::vector<FlightLogRecord> flight_log_records(const std::vector<FlightImage>& flight,
                                                       const RigPreset& rig) {
  std::vector<FlightLogRecord> out;
  out.reserve(flight.size());
  for (const auto& img : flight) {
    const Vec3& p = img.platform.translation;
    out.push_back({img.image_id, rig.cameras.at(img.camera).name, p.x(), p.y(), p.z(), img.yaw_deg,
                   img.pitch_deg, img.roll_deg});
  }
  return out;
}

// Camera poses from platform records and the rig's mounts; camera_id names
// a rig camera.
inline std::vector<Camera> flight_log_cameras(const std::vector<FlightLogRecord>& records,
                                              const RigPreset& rig) {
  std::vector<Camera> cams;
  cams.reserve(records.size());
  for (const auto& r : records) {
    std::size_t k = 0;
    while (k < rig.cameras.size() && rig.cameras[k].name != r.camera_id) ++k;
    if (k == rig.cameras.size()) {
      throw Error("image " + r.image_id + ": rig " + rig.id + " has no camera '" + r.camera_id + "'");
    }
    const PlatformPose platform =
        PlatformPose::from_attitude(r.yaw_deg, r.pitch_deg, r.roll_deg, Vec3(r.x, r.y, r.z));
    cams.push_back({compose_camera_pose(platform, rig.cameras[k].mount, static_cast<int>(k)),
                    rig.cameras[k].intrinsics});
  }
  return cams;
}

}  // namespace uavmg::io
