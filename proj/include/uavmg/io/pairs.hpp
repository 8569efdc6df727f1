#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "uavmg/io/csv.hpp"
#include "uavmg/match_graph.hpp"
#include "uavmg/pair_select.hpp"

namespace uavmg::io {

// One row of a pairs file. Image indices are 0-based rows of the flight log.
struct PairRecord {
  std::size_t image_i = 0;
  std::size_t image_j = 0;
  double area_m2 = 0;
  double angle_deg = 0;
  double weight = 0;

  bool operator==(const PairRecord&) const = default;
};

inline const std::vector<std::string>& pair_columns() {
  static const std::vector<std::string> cols = {"image_i", "image_j", "area_m2", "angle_deg", "weight"};
  return cols;
}

inline void write_pairs(std::ostream& out, const std::vector<PairRecord>& pairs) {
  out << join_header(pair_columns()) << '\n';
  for (const auto& p : pairs) {
    if (p.image_i >= p.image_j) throw InvalidArgument("pairs must be canonical (i < j)");
    out << p.image_i << ',' << p.image_j << ',' << format_g6(p.area_m2) << ','
        << format_g6(p.angle_deg) << ',' << format_g6(p.weight) << '\n';
  }
}

inline std::vector<PairRecord> read_pairs(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(pair_columns());
  std::vector<PairRecord> out;
  CsvRow row;
  while (reader.next_record(row)) {
    PairRecord p{reader.index(row, 0), reader.index(row, 1), reader.number(row, 2),
                 reader.number(row, 3), reader.number(row, 4)};
    if (p.image_i >= p.image_j) throw ParseError(source, row.line, 2, "pair is not canonical (i < j)");
    out.push_back(p);
  }
  return out;
}

inline std::vector<PairRecord> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_pairs(in, path);
}

inline std::vector<PairRecord> pair_records(const std::vector<CandidatePair>& pairs) {
  std::vector<PairRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.i, p.j, p.overlap_area, p.intersection_angle, 0.0});
  return out;
}

inline std::vector<PairRecord> pair_records(const WeightedGraph& g) {
  std::vector<PairRecord> out;
  for (const auto& e : g.sorted_edges()) out.push_back({e.i, e.j, e.area, e.angle, e.weight});
  return out;
}

}  // namespace uavmg::io
