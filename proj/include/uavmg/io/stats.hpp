#pragma once

#include <array>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "uavmg/errors.hpp"

namespace uavmg::io {

struct GcpCheckStats {
  std::size_t controls = 0;
  std::size_t checks = 0;
  std::array<double, 3> mean_error_m{};  // per axis, reconstructed minus surveyed
  std::array<double, 3> rms_error_m{};
  double max_error_m = 0;

  bool operator==(const GcpCheckStats&) const = default;
};

// One run's summary. Every key is always written; stages fill what they know.
struct RunStats {
  std::size_t pairs_full = 0;
  std::size_t pairs_reduced = 0;
  std::size_t pairs_graph = 0;
  double reduction_ratio = 0;  // pairs_full / pairs_graph
  double tests_per_image_mean = 0;
  std::size_t components = 0;
  std::size_t registered_images = 0;
  double rmse_px = 0;
  std::map<std::string, double> wall_ms = {{"pairs", 0.0}, {"graph", 0.0}, {"ba", 0.0}};
  GcpCheckStats gcp;

  void update_ratio() {
    reduction_ratio = pairs_graph > 0 ? static_cast<double>(pairs_full) / static_cast<double>(pairs_graph) : 0.0;
  }

  bool operator==(const RunStats&) const = default;
};

inline nlohmann::json to_json(const RunStats& s) {
  nlohmann::json j;
  j["pairs_full"] = s.pairs_full;
  j["pairs_reduced"] = s.pairs_reduced;
  j["pairs_graph"] = s.pairs_graph;
  j["reduction_ratio"] = s.reduction_ratio;
  j["tests_per_image_mean"] = s.tests_per_image_mean;
  j["components"] = s.components;
  j["registered_images"] = s.registered_images;
  j["rmse_px"] = s.rmse_px;
  j["wall_ms"] = s.wall_ms;
  j["gcp"] = {{"controls", s.gcp.controls},
              {"checks", s.gcp.checks},
              {"mean_error_m", s.gcp.mean_error_m},
              {"rms_error_m", s.gcp.rms_error_m},
              {"max_error_m", s.gcp.max_error_m}};
  return j;
}

inline RunStats stats_from_json(const nlohmann::json& j) {
  RunStats s;
  try {
    s.pairs_full = j.at("pairs_full").get<std::size_t>();
    s.pairs_reduced = j.at("pairs_reduced").get<std::size_t>();
    s.pairs_graph = j.at("pairs_graph").get<std::size_t>();
    s.reduction_ratio = j.at("reduction_ratio").get<double>();
    s.tests_per_image_mean = j.at("tests_per_image_mean").get<double>();
    s.components = j.at("components").get<std::size_t>();
    s.registered_images = j.at("registered_images").get<std::size_t>();
    s.rmse_px = j.at("rmse_px").get<double>();
    s.wall_ms = j.at("wall_ms").get<std::map<std::string, double>>();
    const auto& g = j.at("gcp");
    s.gcp.controls = g.at("controls").get<std::size_t>();
    s.gcp.checks = g.at("checks").get<std::size_t>();
    s.gcp.mean_error_m = g.at("mean_error_m").get<std::array<double, 3>>();
    s.gcp.rms_error_m = g.at("rms_error_m").get<std::array<double, 3>>();
    s.gcp.max_error_m = g.at("max_error_m").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed stats document: ") + e.what());
  }
  return s;
}

inline void write_stats_json(std::ostream& out, const RunStats& s) { out << to_json(s).dump(2) << '\n'; }

inline RunStats read_stats_json(std::istream& in, const std::string& source) {
  try {
    return stats_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(source + ": " + e.what());
  }
}

inline RunStats read_stats_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_stats_json(in, path);
}

}  // namespace uavmg::io
