#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "uavmg/geo_core.hpp"
#include "uavmg/kdtree.hpp"

namespace uavmg {

struct SelectionParams {
  int non_intersection_threshold = 8;  // T_i
  double overlap_ratio = 0.5;          // R_o
  bool soc_enabled = true;

  void validate() const {
    if (non_intersection_threshold < 1) throw InvalidArgument("T_i must be >= 1");
    if (!(overlap_ratio >= 0 && overlap_ratio < 1)) throw InvalidArgument("R_o must be in [0, 1)");
  }
};

// Four-quadrant indicator (flags Q1..Q4 plus zero counter Q5) and the
// non-intersection indicator (flag plus consecutive-miss counter).
// `transitioned` remembers which quadrants have gone 1 -> 0 at least once.
struct IndicatorState {
  std::array<bool, 4> quadrant{};
  int zero_count = 4;
  std::array<bool, 4> transitioned{};
  bool non_intersection = false;
  int non_intersection_count = 0;

  bool operator==(const IndicatorState&) const = default;
};

inline IndicatorState update_indicators(IndicatorState s, int quadrant, bool intersects) {
  if (quadrant < 1 || quadrant > 4) throw InvalidArgument("quadrant must be in 1..4");
  const std::size_t q = static_cast<std::size_t>(quadrant - 1);
  if (intersects) {
    if (!s.quadrant[q]) {
      s.quadrant[q] = true;
      --s.zero_count;
    }
    s.non_intersection = false;
    s.non_intersection_count = 0;
  } else {
    if (s.quadrant[q]) {
      s.quadrant[q] = false;
      ++s.zero_count;
      s.transitioned[q] = true;
    }
    s.non_intersection = true;
    ++s.non_intersection_count;
  }
  return s;
}

// Stop once every quadrant has been opened and closed again, or once more
// than T_i consecutive neighbors missed.
inline bool should_terminate(const IndicatorState& s, const SelectionParams& p) {
  const bool all_closed =
      s.zero_count == 4 && std::all_of(s.transitioned.begin(), s.transitioned.end(),
                                       [](bool b) { return b; });
  return all_closed || s.non_intersection_count > p.non_intersection_threshold;
}

struct CandidatePair {
  std::size_t i = 0;
  std::size_t j = 0;
  double overlap_area = 0;
  double intersection_angle = 0;
  OverlapExtent extent;
};

inline bool soc_check(const CandidatePair& pair, double overlap_ratio) {
  return pair.extent.wo >= pair.extent.wt * overlap_ratio &&
         pair.extent.ho >= pair.extent.ht * overlap_ratio;
}

// Tests `neighbor` against `target`. Returns nothing when the footprints do
// not overlap. Indices are stored canonically (i < j); the extent is
// relative to `target`.
inline std::optional<CandidatePair> test_pair(std::span<const Footprint> fps, std::size_t target,
                                              std::size_t neighbor) {
  const Footprint& t = fps[target];
  const Footprint& n = fps[neighbor];
  const Intersection inter = convex_intersection(t.polygon, n.polygon);
  if (!inter.polygon) return std::nullopt;
  CandidatePair p;
  p.i = std::min(target, neighbor);
  p.j = std::max(target, neighbor);
  p.overlap_area = inter.area;
  p.intersection_angle = intersection_angle(t, n);
  const Envelope te = t.polygon.envelope();
  const Envelope oe = inter.polygon->envelope();
  p.extent = {oe.width(), oe.height(), te.width(), te.height()};
  return p;
}

struct SelectionResult {
  std::vector<CandidatePair> pairs;         // sorted by (i, j)
  std::vector<std::size_t> tests_per_image;  // intersection tests run per target

  double mean_tests() const {
    if (tests_per_image.empty()) return 0;
    double s = 0;
    for (auto t : tests_per_image) s += static_cast<double>(t);
    return s / static_cast<double>(tests_per_image.size());
  }
};

inline std::vector<Vec2> footprint_centers(std::span<const Footprint> fps) {
  std::vector<Vec2> c;
  c.reserve(fps.size());
  for (const auto& f : fps) c.push_back(f.center);
  return c;
}

inline std::vector<KdTree2::Neighbor> knn_neighbors(const KdTree2& index, std::size_t query,
                                                    std::size_t k) {
  return index.knn(query, k);
}

// Spatial-relationship-constrained selection: per target, walk neighbors in
// ascending center distance, test intersection, update the indicators and
// stop on the termination condition.
inline SelectionResult select_pairs(std::span<const Footprint> fps, const SelectionParams& params) {
  params.validate();
  SelectionResult result;
  const std::size_t n = fps.size();
  result.tests_per_image.assign(n, 0);
  if (n < 2) return result;

  const std::vector<Vec2> centers = footprint_centers(fps);
  const KdTree2 index(centers);
  std::map<std::pair<std::size_t, std::size_t>, CandidatePair> found;

  for (std::size_t target = 0; target < n; ++target) {
    IndicatorState state;
    KdTree2::Cursor cursor = index.cursor(centers[target]);
    while (auto nb = cursor.next()) {
      if (nb->index == target) continue;
      ++result.tests_per_image[target];
      const auto pair = test_pair(fps, target, nb->index);
      if (nb->distance > 1e-9) {
        state = update_indicators(state, quadrant_of(centers[target], centers[nb->index]),
                                  pair.has_value());
      } else if (pair) {
        state.non_intersection = false;
        state.non_intersection_count = 0;
      } else {
        state.non_intersection = true;
        ++state.non_intersection_count;
      }
      if (pair && (!params.soc_enabled || soc_check(*pair, params.overlap_ratio))) {
        found.try_emplace({pair->i, pair->j}, *pair);
      }
      if (should_terminate(state, params)) break;
    }
  }
  result.pairs.reserve(found.size());
  for (auto& [key, p] : found) result.pairs.push_back(p);
  return result;
}

// O(n^2) baseline: every pair with positive overlap, extents relative to i.
inline SelectionResult exhaustive_pairs(std::span<const Footprint> fps) {
  SelectionResult result;
  const std::size_t n = fps.size();
  result.tests_per_image.assign(n, n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (auto p = test_pair(fps, i, j)) result.pairs.push_back(*p);
    }
  }
  return result;
}

}  // namespace uavmg
