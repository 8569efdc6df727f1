#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "uavmg/disjoint_set.hpp"
#include "uavmg/pair_select.hpp"

namespace uavmg {

struct GraphEdge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double weight = 0;
  double area = 0;
  double angle = 0;
};

// Undirected image graph. Vertex positions are footprint centers (m).
class WeightedGraph {
 public:
  struct Incidence {
    std::size_t neighbor;
    std::size_t edge;
  };

  WeightedGraph() = default;
  explicit WeightedGraph(std::vector<Vec2> positions)
      : positions_(std::move(positions)), adjacency_(positions_.size()) {}
  explicit WeightedGraph(std::size_t n) : WeightedGraph(std::vector<Vec2>(n, Vec2::Zero())) {}

  std::size_t vertex_count() const { return positions_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Vec2>& positions() const { return positions_; }
  const Vec2& position(std::size_t v) const { return positions_.at(v); }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<Incidence>& incident(std::size_t v) const { return adjacency_.at(v); }

  void add_edge(const GraphEdge& e) {
    GraphEdge c = e;
    if (c.i > c.j) std::swap(c.i, c.j);
    if (c.i == c.j) throw InvalidArgument("self-loops are not allowed");
    if (c.j >= vertex_count()) throw InvalidArgument("edge endpoint out of range");
    if (!(c.weight >= 0 && c.weight <= 1)) throw InvalidArgument("edge weight outside [0, 1]");
    if (!index_.try_emplace(key(c.i, c.j), edges_.size()).second) {
      throw InvalidArgument("duplicate edge");
    }
    adjacency_[c.i].push_back({c.j, edges_.size()});
    adjacency_[c.j].push_back({c.i, edges_.size()});
    edges_.push_back(c);
  }

  bool has_edge(std::size_t a, std::size_t b) const { return find_edge(a, b).has_value(); }

  std::optional<GraphEdge> find_edge(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = index_.find(key(a, b));
    if (it == index_.end()) return std::nullopt;
    return edges_[it->second];
  }

  // Edges sorted by (i, j); stable output order for writers.
  std::vector<GraphEdge> sorted_edges() const {
    std::vector<GraphEdge> e = edges_;
    std::sort(e.begin(), e.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    return e;
  }

  double total_weight() const {
    double s = 0;
    for (const auto& e : edges_) s += e.weight;
    return s;
  }

 private:
  static std::uint64_t key(std::size_t a, std::size_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }

  std::vector<Vec2> positions_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct WeightParams {
  double weight_ratio = 0.6;  // R_w
  double area_max = 1.0;

  void validate() const {
    if (!(weight_ratio >= 0 && weight_ratio <= 1)) throw InvalidArgument("R_w must be in [0, 1]");
    if (!(area_max > 0)) throw InvalidArgument("area_max must be positive");
  }
};

struct ExpansionParams {
  double eigen_ratio = 3.0;        // R_e
  double expansion_angle = 45.0;   // alpha, degrees
  int expansion_threshold = 1;     // T_e

  void validate() const {
    if (!(eigen_ratio >= 1)) throw InvalidArgument("R_e must be >= 1");
    if (!(expansion_angle > 0 && expansion_angle < 90)) throw InvalidArgument("alpha must be in (0, 90)");
    if (expansion_threshold < 1) throw InvalidArgument("T_e must be >= 1");
  }
};

// Linear blend of normalized overlap area and the clipped cosine of the
// intersection angle.
inline double edge_weight(double area, double angle_deg, const WeightParams& p) {
  p.validate();
  if (!(area >= 0)) throw InvalidArgument("area must be non-negative");
  if (area > p.area_max) throw InvalidArgument("area exceeds area_max");
  if (!(angle_deg >= 0 && angle_deg <= 180)) throw InvalidArgument("angle must be in [0, 180]");
  const double w_area = area / p.area_max;
  const double w_angle = angle_deg <= 90.0 ? std::cos(angle_deg * kDegToRad) : 0.0;
  // cos(90 deg) is 6e-17, not zero.
  const double w = p.weight_ratio * w_area + (1.0 - p.weight_ratio) * std::max(0.0, w_angle);
  return std::clamp(w, 0.0, 1.0);
}

// One vertex per image, one edge per pair. area_max is taken over `pairs`.
inline WeightedGraph build_tcn(std::span<const CandidatePair> pairs, std::vector<Vec2> positions,
                               double weight_ratio) {
  WeightParams wp{weight_ratio, 1.0};
  if (!pairs.empty()) {
    wp.area_max = 0;
    for (const auto& p : pairs) wp.area_max = std::max(wp.area_max, p.overlap_area);
  }
  WeightedGraph g(std::move(positions));
  for (const auto& p : pairs) {
    g.add_edge({p.i, p.j, edge_weight(p.overlap_area, p.intersection_angle, wp), p.overlap_area,
                p.intersection_angle});
  }
  return g;
}

// Kruskal over an edge list, ascending (weight, i, j). Returns a spanning
// forest. Weights may be any finite value here.
inline std::vector<GraphEdge> minimum_spanning_tree(std::span<const GraphEdge> edges,
                                                    std::size_t vertex_count) {
  std::vector<GraphEdge> sorted(edges.begin(), edges.end());
  for (auto& e : sorted) {
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(sorted.begin(), sorted.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
  });
  DisjointSet ds(vertex_count);
  std::vector<GraphEdge> tree;
  for (const auto& e : sorted) {
    if (ds.unite(e.i, e.j)) tree.push_back(e);
    if (tree.size() + 1 == vertex_count) break;
  }
  return tree;
}

// Maximum spanning forest: weights are negated and the minimum tree taken,
// so ties resolve as (weight desc, i asc, j asc).
inline WeightedGraph maximum_spanning_tree(const WeightedGraph& g) {
  std::vector<GraphEdge> negated = g.edges();
  for (auto& e : negated) e.weight = -e.weight;
  WeightedGraph tree(g.positions());
  for (auto e : minimum_spanning_tree(negated, g.vertex_count())) {
    e.weight = -e.weight;
    tree.add_edge(e);
  }
  return tree;
}

struct LocalAxes {
  Vec2 spanning_dir;
  Vec2 expansion_dir;
  double ev_max = 0;
  double ev_min = 0;
};

// Principal axes of the vertex and its incident neighbors in `g`.
inline LocalAxes local_axes(std::size_t vertex, const WeightedGraph& g) {
  const auto& inc = g.incident(vertex);
  if (inc.empty()) throw NoNeighborhood("vertex has no incident neighbors");
  std::vector<Vec2> pts;
  pts.reserve(inc.size() + 1);
  pts.push_back(g.position(vertex));
  for (const auto& e : inc) pts.push_back(g.position(e.neighbor));
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  LocalAxes a;
  a.ev_min = std::max(0.0, es.eigenvalues()(0));
  a.ev_max = std::max(0.0, es.eigenvalues()(1));
  a.expansion_dir = es.eigenvectors().col(0).normalized();
  a.spanning_dir = es.eigenvectors().col(1).normalized();
  return a;
}

enum class ExpansionRegion { kNone, kPlus, kMinus };

// Wedges of half-angle alpha around +expansion_dir and -expansion_dir,
// boundaries inclusive.
inline ExpansionRegion in_expansion_region(const Vec2& center, const Vec2& expansion_dir,
                                           double alpha_deg, const Vec2& candidate) {
  const Vec2 d = candidate - center;
  if (!(d.norm() > 1e-12)) throw InvalidArgument("candidate coincides with center");
  const Vec2 u = expansion_dir.normalized();
  const double along = d.dot(u);
  const double across = std::abs(u.x() * d.y() - u.y() * d.x());
  const double angle = std::atan2(across, std::abs(along)) * kRadToDeg;
  constexpr double kSlack = 1e-9;
  if (angle > alpha_deg + kSlack) return ExpansionRegion::kNone;
  return along > 0 ? ExpansionRegion::kPlus : ExpansionRegion::kMinus;
}

// One added edge, with the vertex whose expansion step added it.
struct ExpansionRecord {
  std::size_t vertex;
  std::size_t neighbor;
  ExpansionRegion region;
};

// Grows `mst` with g_tcn edges in the two expansion regions of each vertex
// until each region holds T_e connections. Vertices are visited in
// ascending order against the progressively expanded graph.
inline WeightedGraph mst_expansion(const WeightedGraph& g_tcn, const WeightedGraph& mst,
                                   const ExpansionParams& params,
                                   std::vector<ExpansionRecord>* log = nullptr) {
  params.validate();
  if (g_tcn.vertex_count() != mst.vertex_count()) {
    throw InvalidArgument("tcn and mst have different vertex sets");
  }
  WeightedGraph out(g_tcn.positions());
  for (const auto& e : mst.edges()) {
    const auto tcn_edge = g_tcn.find_edge(e.i, e.j);
    if (!tcn_edge) throw InvalidArgument("mst edge missing from tcn");
    out.add_edge(*tcn_edge);
  }

  const int te = params.expansion_threshold;
  for (std::size_t v = 0; v < out.vertex_count(); ++v) {
    if (out.incident(v).empty()) continue;
    const LocalAxes axes = local_axes(v, out);
    const bool degenerate = axes.ev_min <= 1e-12 * axes.ev_max;
    if (!(axes.ev_max > 0)) continue;
    if (!degenerate && axes.ev_max <= params.eigen_ratio * axes.ev_min) continue;

    const Vec2& c = out.position(v);
    auto region_of = [&](std::size_t u) {
      if ((out.position(u) - c).norm() <= 1e-12) return ExpansionRegion::kNone;
      return in_expansion_region(c, axes.expansion_dir, params.expansion_angle, out.position(u));
    };

    int n_plus = 0;
    int n_minus = 0;
    for (const auto& inc : out.incident(v)) {
      const ExpansionRegion r = region_of(inc.neighbor);
      n_plus += r == ExpansionRegion::kPlus;
      n_minus += r == ExpansionRegion::kMinus;
    }
    if (n_plus >= te && n_minus >= te) continue;

    std::vector<GraphEdge> plus;
    std::vector<GraphEdge> minus;
    for (const auto& inc : g_tcn.incident(v)) {
      if (out.has_edge(v, inc.neighbor)) continue;
      const ExpansionRegion r = region_of(inc.neighbor);
      if (r == ExpansionRegion::kPlus) plus.push_back(g_tcn.edges()[inc.edge]);
      if (r == ExpansionRegion::kMinus) minus.push_back(g_tcn.edges()[inc.edge]);
    }
    auto by_weight_desc = [](const GraphEdge& a, const GraphEdge& b) {
      return std::tie(b.weight, a.i, a.j) < std::tie(a.weight, b.i, b.j);
    };
    auto expand = [&](std::vector<GraphEdge>& cands, int& count, ExpansionRegion r) {
      std::sort(cands.begin(), cands.end(), by_weight_desc);
      for (const auto& e : cands) {
        if (count >= te) break;
        out.add_edge(e);
        ++count;
        if (log) log->push_back({v, e.i == v ? e.j : e.i, r});
      }
    };
    if (n_plus < te) expand(plus, n_plus, ExpansionRegion::kPlus);
    if (n_minus < te) expand(minus, n_minus, ExpansionRegion::kMinus);
  }
  return out;
}

struct GraphStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  double mean_degree = 0;
  std::size_t components = 0;
  std::size_t largest_component = 0;
  double total_weight = 0;
};

inline std::vector<std::size_t> component_labels(const WeightedGraph& g) {
  DisjointSet ds(g.vertex_count());
  for (const auto& e : g.edges()) ds.unite(e.i, e.j);
  std::vector<std::size_t> label(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) label[v] = ds.find(v);
  return label;
}

inline GraphStats graph_stats(const WeightedGraph& g) {
  GraphStats s;
  s.vertices = g.vertex_count();
  s.edges = g.edge_count();
  if (s.vertices == 0) return s;
  s.mean_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.vertices);
  DisjointSet ds(g.vertex_count());
  for (const auto& e : g.edges()) ds.unite(e.i, e.j);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (ds.find(v) == v) {
      ++s.components;
      s.largest_component = std::max(s.largest_component, ds.component_size(v));
    }
  }
  s.total_weight = g.total_weight();
  return s;
}

}  // namespace uavmg
