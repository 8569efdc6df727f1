#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "uavmg/match_graph.hpp"
#include "uavmg/sfm/bundle_adjust.hpp"
#include "uavmg/sfm/tracks.hpp"
#include "uavmg/sfm/triangulate.hpp"

namespace uavmg {

struct IncrementalOptions {
  BaOptions ba;
  // 2D-3D correspondences needed before an image is registered.
  std::size_t min_correspondences = 12;
};

struct IncrementalResult {
  Scene scene;  // all input cameras; tracks/points cover registered images only
  BaReport report;  // global adjustment
  std::vector<bool> registered;
  std::vector<std::size_t> registration_order;
  std::vector<std::size_t> unregistered;
  std::vector<double> stage_rmse;  // after each local adjustment, then the global one
  // For each scene point, the track it came from (index into `tracks`).
  std::vector<std::size_t> point_track;
  std::vector<Track> tracks;

  std::size_t registered_count() const { return registration_order.size(); }
};

namespace detail {

class IncrementalMapper {
 public:
  IncrementalMapper(const WeightedGraph& graph, const std::vector<PairMatches>& matches,
                    const FeatureTable& features, std::vector<Camera> priors,
                    const IncrementalOptions& opts)
      : graph_(graph), cameras_(std::move(priors)), opts_(opts) {
    if (cameras_.size() != graph.vertex_count()) {
      throw InvalidArgument("graph and camera list differ in size");
    }
    std::vector<PairMatches> used;
    for (const auto& pm : matches) {
      if (pm.image_a < graph.vertex_count() && pm.image_b < graph.vertex_count() &&
          graph.has_edge(pm.image_a, pm.image_b)) {
        used.push_back(pm);
        pair_matches_[{pm.image_a, pm.image_b}] = pm.matches.size();
      }
    }
    tracks_ = build_tracks(used, features);
    image_tracks_.assign(cameras_.size(), {});
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      for (const auto& e : tracks_[t].elements) image_tracks_[e.camera].push_back(t);
    }
    track_point_.assign(tracks_.size(), kNoIndex);
    registered_.assign(cameras_.size(), false);
  }

  IncrementalResult run() {
    IncrementalResult res;
    if (auto seed = seed_edge()) {
      register_image(seed->i);
      register_image(seed->j);
      triangulate_new();
      std::deque<std::size_t> queue;
      std::vector<bool> queued(cameras_.size(), false);
      queued[seed->i] = queued[seed->j] = true;
      auto enqueue_neighbors = [&](std::size_t v) {
        std::vector<std::size_t> nb;
        for (const auto& inc : graph_.incident(v)) nb.push_back(inc.neighbor);
        std::sort(nb.begin(), nb.end());
        for (auto u : nb) {
          if (!queued[u]) {
            queued[u] = true;
            queue.push_back(u);
          }
        }
      };
      enqueue_neighbors(seed->i);
      enqueue_neighbors(seed->j);
      std::vector<std::size_t> pending;
      std::size_t since_local = 0;
      bool registered_since_retry = false;
      for (;;) {
        if (queue.empty()) {
          // Deferred images get another pass once new structure exists.
          if (pending.empty() || !registered_since_retry) break;
          queue.assign(pending.begin(), pending.end());
          pending.clear();
          registered_since_retry = false;
        }
        const std::size_t v = queue.front();
        queue.pop_front();
        if (registered_[v]) continue;
        if (correspondences(v) < opts_.min_correspondences || !resect(v)) {
          pending.push_back(v);
          continue;
        }
        register_image(v);
        registered_since_retry = true;
        triangulate_new();
        enqueue_neighbors(v);
        if (++since_local >= static_cast<std::size_t>(opts_.ba.local_batch)) {
          local_adjust();
          since_local = 0;
        }
      }
      Scene scene = current_scene(&res.point_track);
      BaResult ba = bundle_adjust(std::move(scene), opts_.ba);
      res.report = ba.report;
      stage_rmse_.push_back(ba.report.final_rmse);
      res.scene = std::move(ba.scene);
    } else {
      res.scene.cameras = cameras_;
    }
    res.registered = registered_;
    res.registration_order = order_;
    for (std::size_t v = 0; v < cameras_.size(); ++v) {
      if (!registered_[v]) res.unregistered.push_back(v);
    }
    res.stage_rmse = stage_rmse_;
    res.tracks = tracks_;
    return res;
  }

 private:
  // Highest-weight edge in the largest connected component, preferring
  // pairs with at least `min_correspondences` matches.
  std::optional<GraphEdge> seed_edge() const {
    if (graph_.edge_count() == 0) return std::nullopt;
    const auto label = component_labels(graph_);
    std::map<std::size_t, std::size_t> size;
    for (auto l : label) ++size[l];
    std::size_t best_label = label[0];
    std::size_t best_size = 0;
    for (std::size_t v = 0; v < label.size(); ++v) {
      if (size[label[v]] > best_size) {
        best_size = size[label[v]];
        best_label = label[v];
      }
    }
    std::optional<GraphEdge> best;
    bool best_matched = false;
    for (const auto& e : graph_.sorted_edges()) {
      if (label[e.i] != best_label) continue;
      const auto it = pair_matches_.find({e.i, e.j});
      const bool matched = it != pair_matches_.end() && it->second >= opts_.min_correspondences;
      if (!best || (matched && !best_matched) || (matched == best_matched && e.weight > best->weight)) {
        best = e;
        best_matched = matched;
      }
    }
    return best;
  }

  void register_image(std::size_t v) {
    registered_[v] = true;
    order_.push_back(v);
  }

  std::size_t correspondences(std::size_t v) const {
    std::size_t n = 0;
    for (auto t : image_tracks_[v]) n += track_point_[t] != kNoIndex;
    return n;
  }

  const TrackElement* element_in(const Track& t, std::size_t camera) const {
    for (const auto& e : t.elements) {
      if (e.camera == camera) return &e;
    }
    return nullptr;
  }

  // Pose-only refinement from the prior against triangulated points.
  bool resect(std::size_t v) {
    Scene s;
    s.cameras = cameras_;
    s.points = points_;
    for (auto t : image_tracks_[v]) {
      if (track_point_[t] == kNoIndex) continue;
      const TrackElement* e = element_in(tracks_[t], v);
      Vec2 px;
      if (!project(cameras_[v], points_[track_point_[t]], &px)) continue;
      s.tracks.push_back({track_point_[t], {*e}});
    }
    if (s.tracks.size() < opts_.min_correspondences) return false;
    BaOptions o = opts_.ba;
    o.fix_gauge = false;
    o.variable_cameras = {v};
    o.fixed_points.resize(points_.size());
    std::iota(o.fixed_points.begin(), o.fixed_points.end(), std::size_t{0});
    BaResult r = bundle_adjust(std::move(s), o);
    cameras_[v] = r.scene.cameras[v];
    return true;
  }

  void triangulate_new() {
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      if (track_point_[t] != kNoIndex) continue;
      std::vector<TrackElement> obs;
      for (const auto& e : tracks_[t].elements) {
        if (registered_[e.camera]) obs.push_back(e);
      }
      if (obs.size() < 2) continue;
      try {
        const Vec3 X = triangulate(obs, cameras_);
        bool in_front = true;
        for (const auto& e : obs) {
          Vec2 px;
          in_front &= project(cameras_[e.camera], X, &px);
        }
        if (!in_front) continue;
        track_point_[t] = points_.size();
        points_.push_back(X);
      } catch (const DegenerateGeometry&) {
      }
    }
  }

  // Registered observations of triangulated tracks, in front of their camera.
  Scene current_scene(std::vector<std::size_t>* point_track = nullptr) const {
    Scene s;
    s.cameras = cameras_;
    s.points = points_;
    if (point_track) point_track->assign(points_.size(), kNoIndex);
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      if (track_point_[t] == kNoIndex) continue;
      Track tr{track_point_[t], {}};
      for (const auto& e : tracks_[t].elements) {
        Vec2 px;
        if (registered_[e.camera] && project(cameras_[e.camera], points_[tr.point], &px)) {
          tr.elements.push_back(e);
        }
      }
      if (tr.elements.size() < 2) continue;
      if (point_track) (*point_track)[tr.point] = t;
      s.tracks.push_back(std::move(tr));
    }
    return s;
  }

  void local_adjust() {
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(opts_.ba.local_batch), order_.size());
    BaOptions o = opts_.ba;
    o.variable_cameras.assign(order_.end() - static_cast<std::ptrdiff_t>(k), order_.end());
    BaResult r = bundle_adjust(current_scene(), o);
    cameras_ = r.scene.cameras;
    points_ = r.scene.points;
    stage_rmse_.push_back(r.report.final_rmse);
  }

  const WeightedGraph& graph_;
  std::vector<Camera> cameras_;
  IncrementalOptions opts_;
  std::vector<Track> tracks_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_matches_;
  std::vector<std::vector<std::size_t>> image_tracks_;
  std::vector<std::size_t> track_point_;
  std::vector<Vec3> points_;
  std::vector<bool> registered_;
  std::vector<std::size_t> order_;
  std::vector<double> stage_rmse_;
};

}  // namespace detail

// Graph-guided incremental reconstruction: seed on the strongest edge of the
// largest component, register images breadth-first from their priors,
// triangulate as coverage grows, local adjustment every `ba.local_batch`
// registrations and a global adjustment at the end. Only matches on graph
// edges are used.
inline IncrementalResult incremental_reconstruct(const WeightedGraph& graph,
                                                 const std::vector<PairMatches>& matches,
                                                 const FeatureTable& features,
                                                 const std::vector<Camera>& priors,
                                                 const IncrementalOptions& opts = {}) {
  return detail::IncrementalMapper(graph, matches, features, priors, opts).run();
}

}  // namespace uavmg
