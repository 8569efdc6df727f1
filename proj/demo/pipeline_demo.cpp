// End-to-end run on a synthetic penta block: pair selection, match graphs,
// incremental reconstruction. Pass a path to also write the graph as DOT.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "uavmg/io/graph_export.hpp"
#include "uavmg/match_graph.hpp"
#include "uavmg/pair_select.hpp"
#include "uavmg/sfm/incremental.hpp"
#include "uavmg/simulator.hpp"

using namespace uavmg;

int main(int argc, char** argv) {
  const RigPreset rig = rig_preset("penta");
  FlightConfig cfg = FlightConfig::from_preset(rig, 6, 6);
  cfg.position_jitter_m = 0.5;
  cfg.attitude_jitter_deg = 1.0;
  const std::vector<Camera> truth = flight_cameras(generate_flight(cfg, rig), rig);
  const std::vector<Footprint> fps = camera_footprints(truth, cfg.elevation);

  SelectionParams all;
  all.soc_enabled = false;
  const SelectionResult full = select_pairs(fps, all);
  const SelectionResult reduced = select_pairs(fps, SelectionParams{});
  const WeightedGraph tcn = build_tcn(reduced.pairs, footprint_centers(fps), 0.6);
  const WeightedGraph mst = maximum_spanning_tree(tcn);
  const WeightedGraph graph = mst_expansion(tcn, mst, ExpansionParams{});

  std::printf("images          %zu\n", truth.size());
  std::printf("pairs full      %zu\n", full.pairs.size());
  std::printf("pairs reduced   %zu\n", reduced.pairs.size());
  std::printf("mst edges       %zu\n", mst.edge_count());
  std::printf("expanded edges  %zu (%.1fx fewer than full)\n", graph.edge_count(),
              double(full.pairs.size()) / double(graph.edge_count()));

  const auto points = generate_scene(footprint_extent(fps), 0.002, 1, cfg.elevation, 2.0).points;
  ObservationOptions obs_opts;
  obs_opts.noise_px = 0.5;
  obs_opts.seed = 2;
  const SimulatedObservations obs = simulate_observations(truth, points, obs_opts);
  const std::vector<Camera> priors = perturb_priors(truth, 0.5, 0.5, 3);
  const IncrementalResult rec = incremental_reconstruct(graph, obs.matches, obs.features, priors);
  std::printf("registered      %zu / %zu\n", rec.registered_count(), truth.size());
  std::printf("rmse            %.3f px over %zu observations\n", rec.report.final_rmse, rec.report.observations);

  if (argc > 1) {
    std::ofstream out(argv[1]);
    if (!out) {
      std::cerr << "cannot write " << argv[1] << '\n';
      return 1;
    }
    io::export_dot(out, graph);
  }
  return 0;
}
