#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "test_util.hpp"
#include "uavmg/pair_select.hpp"

namespace uavmg {
namespace {

using testing::rect_footprint;
using testing::rect_grid;

IndicatorState make_state(std::array<bool, 4> q) {
  IndicatorState s;
  s.quadrant = q;
  s.zero_count = static_cast<int>(std::count(q.begin(), q.end(), false));
  return s;
}

TEST(UpdateIndicators, FigureRowOne) {
  const IndicatorState s = update_indicators(IndicatorState{}, 2, true);
  EXPECT_EQ(s.quadrant, (std::array<bool, 4>{false, true, false, false}));
  EXPECT_EQ(s.zero_count, 3);
  EXPECT_FALSE(s.non_intersection);
  EXPECT_EQ(s.non_intersection_count, 0);
}

TEST(UpdateIndicators, FigureRowFour) {
  const IndicatorState s = update_indicators(make_state({true, true, false, true}), 1, false);
  EXPECT_EQ(s.quadrant, (std::array<bool, 4>{false, true, false, true}));
  EXPECT_EQ(s.zero_count, 2);
  EXPECT_TRUE(s.non_intersection);
  EXPECT_EQ(s.non_intersection_count, 1);
  EXPECT_TRUE(s.transitioned[0]);
}

TEST(UpdateIndicators, SetBitIsIdempotentAndCounterResets) {
  IndicatorState s = update_indicators(IndicatorState{}, 3, true);
  s = update_indicators(s, 1, false);
  s = update_indicators(s, 1, false);
  EXPECT_EQ(s.non_intersection_count, 2);
  const IndicatorState t = update_indicators(s, 3, true);
  EXPECT_EQ(t.quadrant, s.quadrant);
  EXPECT_EQ(t.zero_count, s.zero_count);
  EXPECT_EQ(t.non_intersection_count, 0);
  EXPECT_FALSE(t.non_intersection);
}

TEST(UpdateIndicators, RejectsBadQuadrant) {
  EXPECT_THROW(update_indicators(IndicatorState{}, 0, true), InvalidArgument);
  EXPECT_THROW(update_indicators(IndicatorState{}, 5, true), InvalidArgument);
}

TEST(UpdateIndicators, ZeroCounterTracksFlagsUnderRandomUpdates) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> q(1, 4), b(0, 1);
  IndicatorState s;
  for (int k = 0; k < 10000; ++k) {
    s = update_indicators(s, q(rng), b(rng) == 1);
    const int zeros = static_cast<int>(std::count(s.quadrant.begin(), s.quadrant.end(), false));
    ASSERT_EQ(s.zero_count, zeros);
    ASSERT_GE(s.non_intersection_count, 0);
    ASSERT_EQ(s.non_intersection, s.non_intersection_count > 0);
  }
}

TEST(ShouldTerminate, FreshStateDoesNotStop) {
  EXPECT_FALSE(should_terminate(IndicatorState{}, SelectionParams{}));
}

TEST(ShouldTerminate, AllQuadrantsOpenedThenClosed) {
  IndicatorState s;
  for (int q = 1; q <= 4; ++q) s = update_indicators(s, q, true);
  EXPECT_FALSE(should_terminate(s, SelectionParams{}));
  for (int q = 1; q <= 3; ++q) s = update_indicators(s, q, false);
  EXPECT_FALSE(should_terminate(s, SelectionParams{}));
  s = update_indicators(s, 4, false);
  EXPECT_EQ(s.zero_count, 4);
  EXPECT_TRUE(should_terminate(s, SelectionParams{}));
}

TEST(ShouldTerminate, CounterAboveThreshold) {
  IndicatorState s;
  s.non_intersection_count = 8;
  EXPECT_FALSE(should_terminate(s, SelectionParams{}));
  s.non_intersection_count = 9;
  EXPECT_TRUE(should_terminate(s, SelectionParams{}));
}

CandidatePair with_extent(double wo, double ho, double wt, double ht) {
  CandidatePair p;
  p.overlap_area = wo * ho;
  p.extent = {wo, ho, wt, ht};
  return p;
}

TEST(SocCheck, Examples) {
  EXPECT_TRUE(soc_check(with_extent(6, 3, 10, 5), 0.5));
  EXPECT_FALSE(soc_check(with_extent(4, 4.5, 10, 5), 0.5));
  EXPECT_TRUE(soc_check(with_extent(1e-3, 1e-3, 10, 5), 0.0));
}

TEST(SelectPairs, SingleImage) {
  const std::vector<Footprint> fps = {rect_footprint({0, 0}, 10, 5)};
  EXPECT_TRUE(select_pairs(fps, SelectionParams{}).pairs.empty());
  EXPECT_TRUE(exhaustive_pairs(fps).pairs.empty());
}

TEST(SelectPairs, TwoByTwoGridKeepsAllPairs) {
  // 60 % overlap on both axes: neighbors overlap 0.6 in one extent and 1.0
  // in the other, diagonals 0.6 x 0.6. All pass R_o = 0.5.
  const auto fps = rect_grid(2, 2, 10, 6, 0.6, 0.6);
  const auto full = exhaustive_pairs(fps);
  ASSERT_EQ(full.pairs.size(), 6u);
  for (const auto& p : full.pairs) {
    EXPECT_GE(p.extent.wo, 0.5 * p.extent.wt);
    EXPECT_GE(p.extent.ho, 0.5 * p.extent.ht);
  }
  const auto sel = select_pairs(fps, SelectionParams{});
  EXPECT_EQ(sel.pairs.size(), 6u);
}

std::set<std::pair<std::size_t, std::size_t>> keys(const SelectionResult& r) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (const auto& p : r.pairs) s.insert({p.i, p.j});
  return s;
}

TEST(SelectPairs, SocOffEqualsExhaustiveOnGrid) {
  const auto fps = rect_grid(10, 10, 100, 66, 0.6, 0.3);
  SelectionParams p;
  p.soc_enabled = false;
  const auto sel = select_pairs(fps, p);
  const auto full = exhaustive_pairs(fps);
  EXPECT_EQ(keys(sel), keys(full));
  for (std::size_t t : sel.tests_per_image) EXPECT_LE(t, fps.size() - 1);
  EXPECT_LT(sel.mean_tests(), full.mean_tests());
}

TEST(SelectPairs, SocOffIsSubsetOfExhaustive) {
  // At high overlap the quadrant rule can stop before distant diagonal
  // overlaps, so only containment holds.
  const auto fps = rect_grid(10, 10, 100, 66, 0.8, 0.6);
  SelectionParams p;
  p.soc_enabled = false;
  const auto sel = keys(select_pairs(fps, p));
  const auto full = keys(exhaustive_pairs(fps));
  EXPECT_TRUE(std::includes(full.begin(), full.end(), sel.begin(), sel.end()));
}

TEST(SelectPairs, SocOnlyEmitsPairsSatisfyingFilter) {
  const auto fps = rect_grid(8, 8, 100, 66, 0.8, 0.6);
  const auto sel = select_pairs(fps, SelectionParams{});
  ASSERT_FALSE(sel.pairs.empty());
  for (const auto& p : sel.pairs) {
    EXPECT_GT(p.overlap_area, 0);
    EXPECT_LT(p.i, p.j);
    EXPECT_TRUE(soc_check(p, 0.5));
  }
  EXPECT_LT(sel.pairs.size(), exhaustive_pairs(fps).pairs.size());
}

TEST(SelectPairs, InvariantToInputOrdering) {
  const auto fps = rect_grid(6, 7, 100, 66, 0.75, 0.55);
  std::vector<std::size_t> perm(fps.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Footprint> shuffled;
  for (auto k : perm) shuffled.push_back(fps[k]);
  for (bool soc : {false, true}) {
    SelectionParams p;
    p.soc_enabled = soc;
    auto ref = keys(select_pairs(fps, p));
    std::set<std::pair<std::size_t, std::size_t>> mapped;
    for (auto [a, b] : keys(select_pairs(shuffled, p))) {
      mapped.insert(std::minmax(perm[a], perm[b]));
    }
    EXPECT_EQ(mapped, ref) << "soc " << soc;
  }
}

TEST(SelectPairs, MeanTestsBoundedOnConstantDensity) {
  std::vector<double> means;
  for (int side : {10, 20, 30}) {
    SelectionParams p;
    p.soc_enabled = false;
    means.push_back(select_pairs(rect_grid(side, side, 100, 66, 0.8, 0.6), p).mean_tests());
  }
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  EXPECT_LT(*hi / *lo, 1.3);
}

TEST(ExhaustivePairs, IdenticalAndDisjoint) {
  const std::vector<Footprint> same = {rect_footprint({0, 0}, 10, 5), rect_footprint({0, 0}, 10, 5)};
  const auto r = exhaustive_pairs(same);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_NEAR(r.pairs[0].overlap_area, 50, 1e-9);
  EXPECT_NEAR(r.pairs[0].intersection_angle, 0, 1e-12);

  std::vector<Footprint> apart;
  for (int k = 0; k < 6; ++k) apart.push_back(rect_footprint({20.0 * k, 0}, 10, 5));
  EXPECT_TRUE(exhaustive_pairs(apart).pairs.empty());
  EXPECT_TRUE(select_pairs(apart, SelectionParams{}).pairs.empty());
}

}  // namespace
}  // namespace uavmg
