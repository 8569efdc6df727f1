#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"
#include "uavmg/sfm/scene.hpp"
#include "uavmg/sfm/tracks.hpp"
#include "uavmg/sfm/triangulate.hpp"

namespace uavmg {
namespace {

const Intrinsics kRx1r(35, 35.8, 23.9, 6000, 4000);

Camera camera_at(const Vec3& c, double yaw = 0, double pitch = 0, double roll = 0,
                 const Intrinsics& in = kRx1r) {
  return {compose_camera_pose(PlatformPose::from_attitude(yaw, pitch, roll, c), {}), in};
}

// Small block: 2 x 3 cameras at 100 m, ground points with every in-frame
// projection as an observation.
Scene exact_scene(std::uint64_t seed, int n_points = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-20, 60), uy(-15, 35), uz(-3, 3), ang(-2, 2);
  Scene s;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      s.cameras.push_back(camera_at(Vec3(20.0 * c, 20.0 * r, 100), ang(rng), ang(rng), ang(rng)));
    }
  }
  while (static_cast<int>(s.points.size()) < n_points) {
    const Vec3 X(ux(rng), uy(rng), uz(rng));
    Track t;
    t.point = s.points.size();
    for (std::size_t k = 0; k < s.cameras.size(); ++k) {
      Vec2 px;
      if (project(s.cameras[k], X, &px) && px.x() >= 0 && px.y() >= 0 && px.x() <= 6000 && px.y() <= 4000) {
        t.elements.push_back({k, kNoIndex, px});
      }
    }
    if (t.elements.size() < 2) continue;
    s.points.push_back(X);
    s.tracks.push_back(t);
  }
  return s;
}

TEST(BuildTracks, SinglePair) {
  const FeatureTable f = {{{1, 1}}, {{2, 2}}};
  const auto t = build_tracks({{0, 1, {{0, 0}}}}, f);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].elements.size(), 2u);
  EXPECT_EQ(t[0].elements[1].pixel, Vec2(2, 2));
}

TEST(BuildTracks, ChainIsTransitive) {
  const FeatureTable f = {{{1, 1}}, {{2, 2}, {5, 5}}, {{3, 3}}};
  const auto t = build_tracks({{0, 1, {{0, 1}}}, {1, 2, {{1, 0}}}}, f);
  ASSERT_EQ(t.size(), 1u);
  ASSERT_EQ(t[0].elements.size(), 3u);
  EXPECT_EQ(t[0].elements[0].camera, 0u);
  EXPECT_EQ(t[0].elements[1].feature, 1u);
  EXPECT_EQ(t[0].elements[2].camera, 2u);
}

TEST(BuildTracks, ConflictingComponentIsDropped) {
  // A0 - B0 - A1 via (A,B) and (B,A) style links through C.
  const FeatureTable f = {{{0, 0}, {1, 1}}, {{2, 2}}, {{3, 3}}, {{4, 4}}};
  const std::vector<PairMatches> m = {{0, 1, {{0, 0}}}, {0, 2, {{1, 0}}}, {1, 2, {{0, 0}}}, {0, 3, {{0, 0}}}};
  EXPECT_TRUE(build_tracks(m, f).empty());
  // Without the closing link the two tracks survive.
  const std::vector<PairMatches> ok = {{0, 1, {{0, 0}}}, {0, 2, {{1, 0}}}};
  EXPECT_EQ(build_tracks(ok, f).size(), 2u);
}

TEST(BuildTracks, RejectsMissingFeature) {
  const FeatureTable f = {{{1, 1}}, {{2, 2}}};
  EXPECT_THROW(build_tracks({{0, 1, {{0, 3}}}}, f), InvalidArgument);
}

TEST(ProjectPoint, OpticalAxisHitsImageCenter) {
  const Camera cam = camera_at({5, 7, 100}, 33, 4, -3);
  const Vec3 X = cam.pose.center() + 80.0 * cam.pose.optical_axis();
  const Vec2 px = project_point(cam, X);
  EXPECT_NEAR(px.x(), 3000, 1e-9);
  EXPECT_NEAR(px.y(), 2000, 1e-9);
}

TEST(ProjectPoint, SimilarTriangles) {
  const Camera cam = camera_at({0, 0, 100});
  const Vec2 px = project_point(cam, {1, 0, 0});
  const double pitch_mm = 35.8 / 6000;
  EXPECT_NEAR(px.x() - 3000, 35.0 / pitch_mm / 100.0, 1e-9);
  EXPECT_NEAR(px.x() - 3000, 58.66, 0.005);
  EXPECT_NEAR(px.y(), 2000, 1e-12);
}

TEST(ProjectPoint, BehindCamera) {
  EXPECT_THROW(project_point(camera_at({0, 0, 100}), {0, 0, 150}), BehindCamera);
}

TEST(ReprojectionCost, ExactSceneIsZero) {
  const Scene s = exact_scene(1);
  const CostReport r = reprojection_cost(s);
  EXPECT_LT(r.cost, 1e-18);
  EXPECT_EQ(r.residuals.size(), 2 * s.observation_count());
}

TEST(ReprojectionCost, SingleDisplacedObservation) {
  Scene s = exact_scene(2, 1);
  s.tracks[0].elements.resize(1);
  s.tracks[0].elements[0].pixel += Vec2(3, 0);
  const CostReport r = reprojection_cost(s);
  EXPECT_NEAR(r.cost, 9, 1e-12);
  EXPECT_NEAR(r.rmse, 3 / std::sqrt(2.0), 1e-12);
}

TEST(ReprojectionCost, MatchesNaiveDoubleLoop) {
  Scene s = exact_scene(3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 2);
  for (auto& t : s.tracks) {
    for (auto& e : t.elements) e.pixel += Vec2(g(rng), g(rng));
  }
  // rho_ij from the tracks, projection written out longhand.
  double oracle = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    for (std::size_t j = 0; j < s.cameras.size(); ++j) {
      const TrackElement* hit = nullptr;
      for (const auto& t : s.tracks) {
        if (t.point != i) continue;
        for (const auto& e : t.elements) {
          if (e.camera == j) hit = &e;
        }
      }
      if (!hit) continue;
      const Camera& c = s.cameras[j];
      const Mat3& R = c.pose.rotation.matrix();
      const Vec3 d = s.points[i] - c.pose.translation;
      const double xc = R.row(0).dot(d), yc = R.row(1).dot(d), zc = R.row(2).dot(d);
      const double f_px_x = 35.0 / (35.8 / 6000), f_px_y = 35.0 / (23.9 / 4000);
      const double u = 3000 + f_px_x * xc / -zc, v = 2000 - f_px_y * yc / -zc;
      oracle += (u - hit->pixel.x()) * (u - hit->pixel.x()) + (v - hit->pixel.y()) * (v - hit->pixel.y());
    }
  }
  EXPECT_NEAR(reprojection_cost(s).cost, oracle, 1e-9 * oracle);

  double flat = 0;
  for (const auto& o : s.observations()) flat += (project_point(s.cameras[o.camera], s.points[o.point]) - o.pixel).squaredNorm();
  EXPECT_NEAR(reprojection_cost(s).cost, flat, 1e-9 * flat);
}

TEST(ReprojectionCost, InvariantToSimilarityTransform) {
  Scene s = exact_scene(4);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  for (auto& t : s.tracks) {
    for (auto& e : t.elements) e.pixel += Vec2(g(rng), g(rng));
  }
  const double before = reprojection_cost(s).cost;
  const Mat3 Q = testing::rot_z(40) * testing::rot_x(7);
  const double scale = 2.5;
  const Vec3 shift(100, -50, 12);
  for (auto& X : s.points) X = scale * Q * X + shift;
  for (auto& c : s.cameras) {
    c.pose.translation = scale * Q * c.pose.translation + shift;
    c.pose.rotation = Rotation(Mat3(c.pose.rotation.matrix() * Q.transpose()));
  }
  EXPECT_NEAR(reprojection_cost(s).cost, before, 1e-8 * before);
}

TEST(ReprojectionCost, BehindCameraNamesIndices) {
  Scene s = exact_scene(5);
  s.points[3] = Vec3(0, 0, 500);
  try {
    reprojection_cost(s);
    FAIL() << "expected BehindCamera";
  } catch (const BehindCamera& e) {
    EXPECT_EQ(e.point(), 3);
    EXPECT_GE(e.camera(), 0);
  }
}

TEST(Triangulate, ExactTwoViews) {
  const std::vector<Camera> cams = {camera_at({-5, 0, 100}), camera_at({5, 0, 100})};
  const std::vector<TrackElement> obs = {{0, kNoIndex, project_point(cams[0], Vec3::Zero())},
                                         {1, kNoIndex, project_point(cams[1], Vec3::Zero())}};
  EXPECT_LT(triangulate(obs, cams).norm(), 1e-9);
}

TEST(Triangulate, NoisyTwoViewsMatchesFirstOrderPrediction) {
  // 10 m baseline at 100 m range, 100 mm lens on a 35.8 mm / 6000 px
  // sensor. First-order depth error is H^2 / (B f_px) * sqrt(2) * sigma.
  const Intrinsics tele(100, 35.8, 23.9, 6000, 4000);
  const std::vector<Camera> cams = {camera_at({-5, 0, 100}, 0, 0, 0, tele), camera_at({5, 0, 100}, 0, 0, 0, tele)};
  const double sigma = 0.5;
  const double predicted_sd = 100.0 * 100.0 / (10.0 * tele.fx_px()) * std::sqrt(2.0) * sigma;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, sigma);
  auto median_error = [&](int trials) {
    std::vector<double> err;
    for (int k = 0; k < trials; ++k) {
      std::vector<TrackElement> obs;
      for (std::size_t c = 0; c < 2; ++c) {
        obs.push_back({c, kNoIndex, project_point(cams[c], Vec3::Zero()) + Vec2(g(rng), g(rng))});
      }
      err.push_back(triangulate(obs, cams).norm());
    }
    std::nth_element(err.begin(), err.begin() + trials / 2, err.end());
    return err[static_cast<std::size_t>(trials / 2)];
  };
  EXPECT_LT(median_error(20), 0.05);
  // Median of |N(0, s)| is 0.674 s; lateral error is an order smaller.
  EXPECT_NEAR(median_error(2000) / (0.674 * predicted_sd), 1.0, 0.15);
}

TEST(Triangulate, SameCenterIsDegenerate) {
  const std::vector<Camera> cams = {camera_at({0, 0, 100}), camera_at({0, 0, 100}, 10)};
  const std::vector<TrackElement> obs = {{0, kNoIndex, {3000, 2000}}, {1, kNoIndex, {3100, 2000}}};
  EXPECT_THROW(triangulate(obs, cams), DegenerateGeometry);
  EXPECT_THROW(triangulate(std::span(obs).first(1), cams), DegenerateGeometry);
}

TEST(Triangulate, ParallelRaysAreDegenerate) {
  const std::vector<Camera> cams = {camera_at({0, 0, 100}), camera_at({10, 0, 100})};
  const std::vector<TrackElement> obs = {{0, kNoIndex, {3000, 2000}}, {1, kNoIndex, {3000, 2000}}};
  EXPECT_THROW(triangulate(obs, cams), DegenerateGeometry);
}

TEST(Scene, ValidateRejectsDuplicateCameraInTrack) {
  Scene s = exact_scene(7);
  s.tracks[0].elements.push_back(s.tracks[0].elements[0]);
  EXPECT_THROW(s.validate(), InvalidArgument);
}

}  // namespace
}  // namespace uavmg
