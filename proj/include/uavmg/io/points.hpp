#pragma once

#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "uavmg/geo/rotation.hpp"
#include "uavmg/io/csv.hpp"

namespace uavmg::io {

inline const std::vector<std::string>& scene_point_columns() {
  static const std::vector<std::string> cols = {"point_id", "x", "y", "z"};
  return cols;
}

// Row k holds point_id k; ids must be consecutive from 0.
inline void write_scene_points(std::ostream& out, const std::vector<Vec3>& points) {
  out << join_header(scene_point_columns()) << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << k << ',' << format_exact(points[k].x()) << ',' << format_exact(points[k].y()) << ','
        << format_exact(points[k].z()) << '\n';
  }
}

inline std::vector<Vec3> read_scene_points(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(scene_point_columns());
  std::vector<Vec3> out;
  CsvRow row;
  while (reader.next_record(row)) {
    const std::size_t id = reader.index(row, 0);
    if (id < out.size()) throw DuplicateKey(source + ":" + std::to_string(row.line) + ": duplicate point_id");
    if (id != out.size()) throw ParseError(source, row.line, 1, "point ids must be consecutive from 0");
    out.emplace_back(reader.number(row, 1), reader.number(row, 2), reader.number(row, 3));
  }
  return out;
}

inline std::vector<Vec3> read_scene_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_scene_points(in, path);
}

enum class GcpRole { kControl, kCheck };

// Surveyed point; point_id indexes the scene points file.
struct GcpRecord {
  std::size_t point_id = 0;
  Vec3 position = Vec3::Zero();
  GcpRole role = GcpRole::kControl;

  bool operator==(const GcpRecord& o) const {
    return point_id == o.point_id && position == o.position && role == o.role;
  }
};

inline const std::vector<std::string>& gcp_columns() {
  static const std::vector<std::string> cols = {"point_id", "x", "y", "z", "role"};
  return cols;
}

inline void write_gcps(std::ostream& out, const std::vector<GcpRecord>& gcps) {
  out << join_header(gcp_columns()) << '\n';
  for (const auto& g : gcps) {
    out << g.point_id << ',' << format_exact(g.position.x()) << ',' << format_exact(g.position.y())
        << ',' << format_exact(g.position.z()) << ','
        << (g.role == GcpRole::kControl ? "control" : "check") << '\n';
  }
}

inline std::vector<GcpRecord> read_gcps(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(gcp_columns());
  std::vector<GcpRecord> out;
  std::set<std::size_t> ids;
  CsvRow row;
  while (reader.next_record(row)) {
    GcpRecord g;
    g.point_id = reader.index(row, 0);
    g.position = Vec3(reader.number(row, 1), reader.number(row, 2), reader.number(row, 3));
    const std::string& role = reader.text(row, 4);
    if (role == "control") g.role = GcpRole::kControl;
    else if (role == "check") g.role = GcpRole::kCheck;
    else throw ParseError(source, row.line, 5, "role must be control or check, got '" + role + "'");
    if (!ids.insert(g.point_id).second) {
      throw DuplicateKey(source + ":" + std::to_string(row.line) + ": duplicate point_id");
    }
    out.push_back(g);
  }
  return out;
}

inline std::vector<GcpRecord> read_gcps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_gcps(in, path);
}

}  // namespace uavmg::io
