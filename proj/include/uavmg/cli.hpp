#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavmg/io.hpp"
#include "uavmg/match_graph.hpp"
#include "uavmg/pair_select.hpp"
#include "uavmg/sfm/incremental.hpp"
#include "uavmg/simulator.hpp"

namespace uavmg::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

namespace detail {

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

struct FlightInput {
  std::string log_path;
  std::string preset = "penta";
  double elevation = 0;

  void add_to(CLI::App* app) {
    app->add_option("--flight-log", log_path, "Flight log CSV")->required();
    app->add_option("--preset", preset, "Rig preset naming the camera_id mounts")
        ->check(CLI::IsMember(rig_preset_names()));
    app->add_option("--elevation", elevation, "Ground plane height, m");
  }
};

struct LoadedFlight {
  std::vector<io::FlightLogRecord> records;
  std::vector<Camera> cameras;
  std::vector<Footprint> footprints;

  std::vector<std::string> labels() const {
    std::vector<std::string> l;
    for (const auto& r : records) l.push_back(r.image_id);
    return l;
  }

  // Vertex order by ascending image_id.
  std::vector<std::size_t> id_order() const {
    std::vector<std::size_t> o(records.size());
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::sort(o.begin(), o.end(),
              [&](std::size_t a, std::size_t b) { return records[a].image_id < records[b].image_id; });
    return o;
  }
};

inline LoadedFlight load_flight(const FlightInput& in) {
  LoadedFlight f;
  f.records = io::parse_flight_log(in.log_path);
  f.cameras = io::flight_log_cameras(f.records, rig_preset(in.preset));
  f.footprints = camera_footprints(f.cameras, in.elevation);
  return f;
}

struct StatsOutput {
  std::string path;
  std::string in_path;
  bool timings = false;

  void add_to(CLI::App* app) {
    app->add_option("--stats", path, "Write the run summary JSON here");
    app->add_option("--stats-in", in_path, "Carry forward fields from an earlier stage's JSON");
    app->add_flag("--timings", timings, "Record wall-clock milliseconds (output is then not reproducible)");
  }

  io::RunStats initial() const { return in_path.empty() ? io::RunStats{} : io::read_stats_json(in_path); }

  void write(io::RunStats s, const std::string& stage, double ms) const {
    if (path.empty()) return;
    if (timings) s.wall_ms[stage] = ms;
    s.update_ratio();
    auto out = open_out(path);
    io::write_stats_json(out, s);
  }
};

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string preset = "penta";
  int strips = 3;
  int stations = 5;
  double height = 0;  // 0 keeps the preset's value
  double forward_overlap = -1;
  double side_overlap = -1;
  double elevation = 0;
  double jitter_pos = 0;
  double jitter_ang = 0;
  double density = 0.01;
  double height_jitter = 2.0;
  std::size_t gcp_controls = 4;
  std::size_t gcp_checks = 39;
  std::uint64_t seed = 0;
  std::string out_dir;
};

// Scene points seen by at least three cameras are GCP candidates. Controls
// are the candidates nearest the corners of their bounding box; checks are
// a seeded sample of the rest.
inline std::vector<io::GcpRecord> pick_gcps(const std::vector<Camera>& cams, const std::vector<Vec3>& pts,
                                            std::size_t controls, std::size_t checks, std::uint64_t seed) {
  std::vector<std::size_t> cand;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    int seen = 0;
    for (const auto& c : cams) {
      Vec2 px;
      if (project(c, pts[p], &px) && px.x() >= 0 && px.y() >= 0 && px.x() < c.intrinsics.image_width_px &&
          px.y() < c.intrinsics.image_height_px) {
        ++seen;
      }
    }
    if (seen >= 3) cand.push_back(p);
  }
  std::vector<io::GcpRecord> out;
  if (cand.empty()) return out;
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (auto p : cand) {
    lo = lo.cwiseMin(pts[p].head<2>());
    hi = hi.cwiseMax(pts[p].head<2>());
  }
  const Vec2 corners[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  std::vector<bool> used(pts.size(), false);
  for (std::size_t k = 0; k < std::min<std::size_t>(controls, 4); ++k) {
    std::size_t best = cand.front();
    double bd = std::numeric_limits<double>::infinity();
    for (auto p : cand) {
      const double d = (pts[p].head<2>() - corners[k]).squaredNorm();
      if (!used[p] && d < bd) {
        bd = d;
        best = p;
      }
    }
    if (used[best]) break;
    used[best] = true;
    out.push_back({best, pts[best], io::GcpRole::kControl});
  }
  std::vector<std::size_t> rest;
  for (auto p : cand) {
    if (!used[p]) rest.push_back(p);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(rest.begin(), rest.end(), rng);
  rest.resize(std::min(rest.size(), checks));
  std::sort(rest.begin(), rest.end());
  for (auto p : rest) out.push_back({p, pts[p], io::GcpRole::kCheck});
  return out;
}

inline void run_simulate(const SimulateArgs& a, std::ostream& out) {
  const RigPreset rig = rig_preset(a.preset);
  FlightConfig fc = FlightConfig::from_preset(rig, a.strips, a.stations);
  if (a.height > 0) fc.flight_height = a.height;
  if (a.forward_overlap >= 0) fc.forward_overlap = a.forward_overlap;
  if (a.side_overlap >= 0) fc.side_overlap = a.side_overlap;
  fc.elevation = a.elevation;
  fc.position_jitter_m = a.jitter_pos;
  fc.attitude_jitter_deg = a.jitter_ang;
  fc.seed = a.seed;
  fc.validate();
  if (!(a.density > 0)) throw InvalidArgument("density must be positive");
  const auto flight = generate_flight(fc, rig);
  const auto cams = flight_cameras(flight, rig);
  const auto fps = camera_footprints(cams, a.elevation);
  const auto scene = generate_scene(footprint_extent(fps), a.density, a.seed + 1, a.elevation, a.height_jitter);
  const auto gcps = pick_gcps(cams, scene.points, a.gcp_controls, a.gcp_checks, a.seed + 2);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  {
    auto f = open_out((dir / "flight_log.csv").string());
    io::write_flight_log(f, io::flight_log_records(flight, rig));
  }
  {
    auto f = open_out((dir / "scene_points.csv").string());
    io::write_scene_points(f, scene.points);
  }
  {
    auto f = open_out((dir / "gcp.csv").string());
    io::write_gcps(f, gcps);
  }
  out << "images " << flight.size() << "\npoints " << scene.points.size() << "\ngcps " << gcps.size() << '\n';
}

// --- pairs ----------------------------------------------------------------

struct PairsArgs {
  FlightInput flight;
  std::string out_path;
  bool no_soc = false;
  bool exhaustive = false;
  double overlap_ratio = 0.5;
  int ti = 8;
  double rw = 0.6;
  StatsOutput stats;
};

inline void run_pairs(const PairsArgs& a, std::ostream& out) {
  Stopwatch clock;
  const LoadedFlight f = load_flight(a.flight);
  SelectionParams sp;
  sp.non_intersection_threshold = a.ti;
  sp.overlap_ratio = a.overlap_ratio;
  sp.validate();
  io::RunStats s = a.stats.initial();
  SelectionResult sel;
  if (a.exhaustive) {
    sel = exhaustive_pairs(f.footprints);
    s.pairs_full = sel.pairs.size();
    s.pairs_reduced = sel.pairs.size();
  } else {
    sp.soc_enabled = false;
    const SelectionResult full = select_pairs(f.footprints, sp);
    sp.soc_enabled = true;
    const SelectionResult reduced = select_pairs(f.footprints, sp);
    s.pairs_full = full.pairs.size();
    s.pairs_reduced = reduced.pairs.size();
    sel = a.no_soc ? full : reduced;
  }
  s.tests_per_image_mean = sel.mean_tests();
  const WeightedGraph tcn = build_tcn(sel.pairs, footprint_centers(f.footprints), a.rw);
  {
    auto o = open_out(a.out_path);
    io::write_pairs(o, io::pair_records(tcn));
  }
  s.pairs_graph = tcn.edge_count();
  s.components = graph_stats(tcn).components;
  a.stats.write(s, "pairs", clock.ms());
  out << "images " << f.records.size() << "\npairs " << sel.pairs.size() << '\n';
}

// --- graph ----------------------------------------------------------------

struct GraphArgs {
  FlightInput flight;
  std::string pairs_path;
  std::string mode = "mst-expansion";
  double rw = 0.6;
  double re = 3.0;
  double alpha = 45.0;
  int te = 1;
  double overlap_ratio = 0.5;
  std::string out_prefix;
  StatsOutput stats;
};

inline const std::vector<std::string>& graph_modes() {
  static const std::vector<std::string> m = {"full", "reduced", "mst", "mst-expansion"};
  return m;
}

// Full graph: every input pair. Reduced: pairs passing the overlap-ratio
// check from either image. MST and expansion are derived from the reduced
// graph.
inline WeightedGraph build_graph_mode(const std::vector<io::PairRecord>& records,
                                      const std::vector<Footprint>& fps, const GraphArgs& a,
                                      std::size_t* reduced_count = nullptr) {
  const std::size_t n = fps.size();
  std::vector<CandidatePair> full, reduced;
  for (const auto& r : records) {
    if (r.image_j >= n) {
      throw Error("pair (" + std::to_string(r.image_i) + ", " + std::to_string(r.image_j) +
                  ") references an image beyond the flight log's " + std::to_string(n));
    }
    CandidatePair c;
    c.i = r.image_i;
    c.j = r.image_j;
    c.overlap_area = r.area_m2;
    c.intersection_angle = r.angle_deg;
    full.push_back(c);
    const auto from_i = test_pair(fps, r.image_i, r.image_j);
    const auto from_j = test_pair(fps, r.image_j, r.image_i);
    if ((from_i && soc_check(*from_i, a.overlap_ratio)) || (from_j && soc_check(*from_j, a.overlap_ratio))) {
      reduced.push_back(c);
    }
  }
  if (reduced_count) *reduced_count = reduced.size();
  const std::vector<Vec2> centers = footprint_centers(fps);
  if (a.mode == "full") return build_tcn(full, centers, a.rw);
  const WeightedGraph tcn = build_tcn(reduced, centers, a.rw);
  if (a.mode == "reduced") return tcn;
  const WeightedGraph mst = maximum_spanning_tree(tcn);
  if (a.mode == "mst") return mst;
  return mst_expansion(tcn, mst, {a.re, a.alpha, a.te});
}

inline void run_graph(const GraphArgs& a, std::ostream& out) {
  Stopwatch clock;
  const LoadedFlight f = load_flight(a.flight);
  const auto records = io::read_pairs(a.pairs_path);
  io::RunStats s = a.stats.initial();
  std::size_t reduced = 0;
  const WeightedGraph g = build_graph_mode(records, f.footprints, a, &reduced);
  {
    auto o = open_out(a.out_prefix + ".csv");
    io::write_pairs(o, io::pair_records(g));
  }
  {
    auto o = open_out(a.out_prefix + ".dot");
    io::export_dot(o, g, f.labels());
  }
  if (g.vertex_count() > 0) {
    auto o = open_out(a.out_prefix + ".pgm");
    io::export_adjacency_pgm(o, g, f.id_order());
  }
  if (a.stats.in_path.empty()) s.pairs_full = records.size();
  s.pairs_reduced = reduced;
  s.pairs_graph = g.edge_count();
  const GraphStats gs = graph_stats(g);
  s.components = gs.components;
  a.stats.write(s, "graph", clock.ms());
  out << "mode " << a.mode << "\nedges " << g.edge_count() << "\ncomponents " << gs.components << '\n';
}

// --- ba -------------------------------------------------------------------

struct BaArgs {
  FlightInput flight;
  std::string scene_path;
  std::string graph_path;
  std::string gcp_path;
  double noise = 0.5;
  double prior_pos = 0.5;
  double prior_ang = 0.5;
  double cutoff = 90.0;
  std::uint64_t seed = 0;
  int local_batch = 5;
  int max_iterations = 100;
  StatsOutput stats;
};

// Errors of reconstructed check points against their surveyed positions.
inline io::GcpCheckStats check_point_stats(const std::vector<Vec3>& errors) {
  io::GcpCheckStats g;
  g.checks = errors.size();
  if (errors.empty()) return g;
  Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
  for (const auto& e : errors) {
    sum += e;
    sq += e.cwiseProduct(e);
    g.max_error_m = std::max(g.max_error_m, e.norm());
  }
  const double n = static_cast<double>(errors.size());
  for (int k = 0; k < 3; ++k) {
    g.mean_error_m[static_cast<std::size_t>(k)] = sum[k] / n;
    g.rms_error_m[static_cast<std::size_t>(k)] = std::sqrt(sq[k] / n);
  }
  return g;
}

inline void run_ba(const BaArgs& a, std::ostream& out) {
  Stopwatch clock;
  const LoadedFlight f = load_flight(a.flight);
  const auto points = io::read_scene_points(a.scene_path);
  const auto edges = io::read_pairs(a.graph_path);
  const std::size_t n = f.cameras.size();
  WeightedGraph g(footprint_centers(f.footprints));
  for (const auto& e : edges) {
    if (e.image_j >= n) throw Error("graph references an image beyond the flight log");
    if (!(e.weight >= 0 && e.weight <= 1)) throw Error("graph edge weight outside [0, 1]");
    g.add_edge({e.image_i, e.image_j, e.weight, e.area_m2, e.angle_deg});
  }
  ObservationOptions oo;
  oo.noise_px = a.noise;
  oo.seed = a.seed;
  oo.matchability_cutoff_deg = a.cutoff;
  oo.elevation = a.flight.elevation;
  const SimulatedObservations obs = simulate_observations(f.cameras, points, oo);
  const auto priors = perturb_priors(f.cameras, a.prior_pos, a.prior_ang, a.seed + 1);
  IncrementalOptions io_opts;
  io_opts.ba.local_batch = a.local_batch;
  io_opts.ba.max_iterations = a.max_iterations;
  IncrementalResult res = incremental_reconstruct(g, obs.matches, obs.features, priors, io_opts);

  io::RunStats s = a.stats.initial();
  s.components = graph_stats(g).components;
  s.registered_images = res.registered_count();
  s.rmse_px = res.report.final_rmse;

  if (!a.gcp_path.empty()) {
    const auto gcps = io::read_gcps(a.gcp_path);
    // Ground-truth point behind each reconstructed point.
    std::map<std::size_t, std::size_t> recon_of;
    for (std::size_t p = 0; p < res.point_track.size(); ++p) {
      if (res.point_track[p] == kNoIndex) continue;
      const TrackElement& e = res.tracks[res.point_track[p]].elements.front();
      recon_of.emplace(obs.feature_point[e.camera][e.feature], p);
    }
    std::vector<GroundControlPoint> controls;
    for (const auto& gc : gcps) {
      if (gc.role != io::GcpRole::kControl) continue;
      if (auto it = recon_of.find(gc.point_id); it != recon_of.end()) controls.push_back({it->second, gc.position});
    }
    BaResult adjusted = bundle_adjust_gcp(res.scene, controls, io_opts.ba);
    std::vector<Vec3> errors;
    for (const auto& gc : gcps) {
      if (gc.role != io::GcpRole::kCheck) continue;
      if (auto it = recon_of.find(gc.point_id); it != recon_of.end()) {
        errors.push_back(adjusted.scene.points[it->second] - gc.position);
      }
    }
    s.gcp = check_point_stats(errors);
    s.gcp.controls = controls.size();
    s.rmse_px = adjusted.report.final_rmse;
  }
  a.stats.write(s, "ba", clock.ms());
  out << "registered " << s.registered_images << '/' << n << "\nrmse_px " << io::format_g6(s.rmse_px) << '\n';
  if (s.gcp.controls > 0) {
    out << "gcp controls " << s.gcp.controls << " checks " << s.gcp.checks << " max_error_m "
        << io::format_g6(s.gcp.max_error_m) << '\n';
  }
}

// --- stats ----------------------------------------------------------------

inline void run_stats(const std::vector<std::string>& inputs, const std::string& out_path, std::ostream& out) {
  std::ostringstream table;
  table << "file,pairs_full,pairs_reduced,pairs_graph,reduction_ratio,tests_per_image_mean,components,"
           "registered_images,rmse_px\n";
  for (const auto& path : inputs) {
    const io::RunStats s = io::read_stats_json(path);
    table << path << ',' << s.pairs_full << ',' << s.pairs_reduced << ',' << s.pairs_graph << ','
          << io::format_g6(s.reduction_ratio) << ',' << io::format_g6(s.tests_per_image_mean) << ','
          << s.components << ',' << s.registered_images << ',' << io::format_g6(s.rmse_px) << '\n';
  }
  if (out_path.empty()) {
    out << table.str();
  } else {
    auto o = open_out(out_path);
    o << table.str();
  }
}

}  // namespace detail

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 1 on usage errors and 2 on data errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Match-graph planning for oblique UAV image sets", "uavmg"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Synthetic flight log, scene points and GCPs");
  c_sim->add_option("--preset", sim.preset, "Rig preset")->check(CLI::IsMember(rig_preset_names()));
  c_sim->add_option("--strips", sim.strips, "Flight strips")->check(CLI::PositiveNumber);
  c_sim->add_option("--stations", sim.stations, "Exposure stations per strip")->check(CLI::PositiveNumber);
  c_sim->add_option("--height", sim.height, "Flight height above ground, m (default: preset)");
  c_sim->add_option("--forward-overlap", sim.forward_overlap, "Forward overlap (default: preset)");
  c_sim->add_option("--side-overlap", sim.side_overlap, "Side overlap (default: preset)");
  c_sim->add_option("--elevation", sim.elevation, "Ground plane height, m");
  c_sim->add_option("--jitter-pos", sim.jitter_pos, "Position jitter sigma, m");
  c_sim->add_option("--jitter-ang", sim.jitter_ang, "Attitude jitter sigma, deg");
  c_sim->add_option("--density", sim.density, "Scene points per square meter");
  c_sim->add_option("--height-jitter", sim.height_jitter, "Scene relief sigma, m");
  c_sim->add_option("--gcp-controls", sim.gcp_controls, "Control points (at most 4)");
  c_sim->add_option("--gcp-checks", sim.gcp_checks, "Check points");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--out-dir", sim.out_dir, "Output directory")->required();

  PairsArgs pa;
  auto* c_pairs = app.add_subcommand("pairs", "Select overlapping image pairs from a flight log");
  pa.flight.add_to(c_pairs);
  c_pairs->add_option("--out", pa.out_path, "Pairs CSV")->required();
  c_pairs->add_flag("--no-soc", pa.no_soc, "Keep pairs failing the overlap-ratio check");
  c_pairs->add_flag("--exhaustive", pa.exhaustive, "Test every pair instead");
  c_pairs->add_option("--overlap-ratio", pa.overlap_ratio, "Overlap-ratio threshold R_o");
  c_pairs->add_option("--ti", pa.ti, "Non-intersection threshold T_i");
  c_pairs->add_option("--rw", pa.rw, "Weight ratio R_w for the weight column");
  pa.stats.add_to(c_pairs);

  GraphArgs ga;
  auto* c_graph = app.add_subcommand("graph", "Build a match graph from pairs");
  ga.flight.add_to(c_graph);
  c_graph->add_option("--pairs", ga.pairs_path, "Pairs CSV")->required();
  c_graph->add_option("--mode", ga.mode, "full | reduced | mst | mst-expansion")->check(CLI::IsMember(graph_modes()));
  c_graph->add_option("--rw", ga.rw, "Weight ratio R_w");
  c_graph->add_option("--re", ga.re, "Eigenvalue ratio R_e");
  c_graph->add_option("--alpha", ga.alpha, "Expansion angle, deg");
  c_graph->add_option("--te", ga.te, "Expansion threshold T_e");
  c_graph->add_option("--overlap-ratio", ga.overlap_ratio, "Overlap-ratio threshold for the reduced graph");
  c_graph->add_option("--out-prefix", ga.out_prefix, "Writes <prefix>.csv, .dot and .pgm")->required();
  ga.stats.add_to(c_graph);

  BaArgs ba;
  auto* c_ba = app.add_subcommand("ba", "Reconstruct a synthetic scene along a match graph");
  ba.flight.add_to(c_ba);
  c_ba->add_option("--scene", ba.scene_path, "Scene points CSV")->required();
  c_ba->add_option("--graph", ba.graph_path, "Graph pairs CSV")->required();
  c_ba->add_option("--gcp", ba.gcp_path, "GCP CSV; enables control-point adjustment");
  c_ba->add_option("--noise", ba.noise, "Pixel noise sigma");
  c_ba->add_option("--prior-pos", ba.prior_pos, "Prior position sigma, m");
  c_ba->add_option("--prior-ang", ba.prior_ang, "Prior attitude sigma, deg");
  c_ba->add_option("--cutoff", ba.cutoff, "Matchability cutoff angle, deg");
  c_ba->add_option("--seed", ba.seed, "Random seed");
  c_ba->add_option("--local-batch", ba.local_batch, "Local adjustment every k registrations");
  c_ba->add_option("--max-iterations", ba.max_iterations, "Adjustment iteration cap");
  ba.stats.add_to(c_ba);

  std::vector<std::string> stat_inputs;
  std::string stat_out;
  auto* c_stats = app.add_subcommand("stats", "Tabulate run summary JSON files as CSV");
  c_stats->add_option("inputs", stat_inputs, "Stats JSON files")->required();
  c_stats->add_option("--out", stat_out, "Write the table here instead of stdout");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_sim) run_simulate(sim, out);
    else if (*c_pairs) run_pairs(pa, out);
    else if (*c_graph) run_graph(ga, out);
    else if (*c_ba) run_ba(ba, out);
    else if (*c_stats) run_stats(stat_inputs, stat_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace uavmg::cli
