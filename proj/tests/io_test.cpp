#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "uavmg/io.hpp"

namespace uavmg::io {
namespace {

std::vector<FlightLogRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_flight_log(in, "log.csv");
}

const std::string kHeader = "image_id,camera_id,x,y,z,yaw_deg,pitch_deg,roll_deg\n";

TEST(Csv, ExactFormatRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 10000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::strtod(format_exact(v).c_str(), nullptr), v);
  }
}

TEST(Csv, SixSignificantDigits) {
  EXPECT_EQ(format_g6(3.14159265), "3.14159");
  EXPECT_EQ(format_g6(123456789.0), "1.23457e+08");
  EXPECT_EQ(round_g6(0.123456789), 0.123457);
}

TEST(FlightLog, HeaderOnlyIsEmpty) { EXPECT_TRUE(parse(kHeader).empty()); }

TEST(FlightLog, EmptyFileIsAnError) { EXPECT_THROW(parse(""), ParseError); }

TEST(FlightLog, OneRowRoundTripsBitExactly) {
  const FlightLogRecord r{"IMG_0001", "nadir", 0.1, -2.0 / 3.0, 175.00000000000003, 359.9, -1e-17, 45};
  std::ostringstream out;
  write_flight_log(out, {r});
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
  std::ostringstream again;
  write_flight_log(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(FlightLog, CommentsAndBlankLinesAreSkipped) {
  const auto recs = parse("# exported by hand\n" + kHeader + "\n# mid comment\na,nadir,1,2,3,0,0,0\r\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].image_id, "a");
  EXPECT_EQ(recs[0].z, 3);
}

TEST(FlightLog, ShortRowNamesItsLine) {
  try {
    parse("# c\n" + kHeader + "a,nadir,1,2,3,0,0,0\nb,nadir,1,2,3,0,0\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.column(), 8u);
  }
}

TEST(FlightLog, MissingHeaderColumnIsNamed) {
  try {
    parse("image_id,camera_id,x,y,z,yaw_deg,pitch_deg\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 8u);
    EXPECT_NE(std::string(e.what()).find("roll_deg"), std::string::npos);
  }
}

TEST(FlightLog, BadNumberNamesItsColumn) {
  try {
    parse(kHeader + "a,nadir,1,2,abc,0,0,0\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 5u);
  }
  EXPECT_THROW(parse(kHeader + "a,nadir,1,2,nan,0,0,0\n"), ParseError);
  EXPECT_THROW(parse(kHeader + "a,nadir,1,2,3 ,0,0,0\n"), ParseError);
  EXPECT_THROW(parse(kHeader + ",nadir,1,2,3,0,0,0\n"), ParseError);
}

TEST(FlightLog, DuplicateImageId) {
  EXPECT_THROW(parse(kHeader + "a,nadir,1,2,3,0,0,0\na,left,1,2,3,0,0,0\n"), DuplicateKey);
}

TEST(FlightLog, GeodeticFrameIsConvertedAboutFirstRecord) {
  const double lat0 = 30.0, lon0 = 114.0, dlat = 1e-3, dlon = 1e-3;
  std::ostringstream text;
  text.precision(17);
  text << "# frame=geodetic\n" << kHeader << "a,nadir," << lon0 << ',' << lat0 << ",150,0,0,0\n"
       << "b,nadir," << lon0 << ',' << lat0 + dlat << ",150,0,0,0\n"
       << "c,nadir," << lon0 + dlon << ',' << lat0 << ",150,0,0,0\n";
  const auto recs = parse(text.str());
  ASSERT_EQ(recs.size(), 3u);
  // Origin sits on the ellipsoid below the first record.
  EXPECT_NEAR(recs[0].x, 0, 1e-9);
  EXPECT_NEAR(recs[0].y, 0, 1e-9);
  EXPECT_NEAR(recs[0].z, 150, 1e-6);
  // Small offsets follow the meridian and prime-vertical radii.
  const double a = 6378137.0, f = 1 / 298.257223563, e2 = f * (2 - f);
  const double s = std::sin(lat0 * M_PI / 180);
  const double m = a * (1 - e2) / std::pow(1 - e2 * s * s, 1.5);
  const double n = a / std::sqrt(1 - e2 * s * s);
  EXPECT_NEAR(recs[1].y, (m + 150) * dlat * M_PI / 180, 0.01);
  EXPECT_NEAR(recs[1].x, 0, 1e-6);
  EXPECT_NEAR(recs[2].x, (n + 150) * std::cos(lat0 * M_PI / 180) * dlon * M_PI / 180, 0.01);
  EXPECT_NEAR(recs[2].y, 0, 0.01);
}

TEST(FlightLog, CamerasFollowTheRig) {
  const RigPreset rig = rig_preset("penta");
  const auto recs = parse(kHeader + "a,left,10,20,175,90,0,0\n");
  const auto cams = flight_log_cameras(recs, rig);
  const CameraPose expect = compose_camera_pose(
      PlatformPose::from_attitude(90, 0, 0, Vec3(10, 20, 175)), rig.camera("left").mount);
  EXPECT_TRUE(cams[0].pose.rotation.matrix().isApprox(expect.rotation.matrix(), 1e-15));
  EXPECT_EQ(cams[0].pose.translation, expect.translation);
  EXPECT_THROW(flight_log_cameras(parse(kHeader + "a,top,0,0,1,0,0,0\n"), rig), Error);
}

TEST(FlightLog, SimulatedFlightRoundTrips) {
  const RigPreset rig = rig_preset("dual");
  FlightConfig fc = FlightConfig::from_preset(rig, 2, 3);
  fc.position_jitter_m = 1;
  fc.attitude_jitter_deg = 2;
  fc.seed = 7;
  const auto flight = generate_flight(fc, rig);
  std::ostringstream out;
  write_flight_log(out, flight_log_records(flight, rig));
  const auto cams = flight_log_cameras(parse(out.str()), rig);
  const auto truth = flight_cameras(flight, rig);
  ASSERT_EQ(cams.size(), truth.size());
  for (std::size_t k = 0; k < cams.size(); ++k) {
    EXPECT_EQ(cams[k].pose.translation, truth[k].pose.translation);
    EXPECT_EQ(cams[k].pose.rotation.matrix(), truth[k].pose.rotation.matrix());
  }
}

std::vector<PairRecord> read(const std::string& text) {
  std::istringstream in(text);
  return read_pairs(in, "pairs.csv");
}

TEST(Pairs, EmptyListIsHeaderOnly) {
  std::ostringstream out;
  write_pairs(out, {});
  EXPECT_EQ(out.str(), "image_i,image_j,area_m2,angle_deg,weight\n");
  EXPECT_TRUE(read(out.str()).empty());
}

TEST(Pairs, OnePairOneRow) {
  std::ostringstream out;
  write_pairs(out, {{3, 7, 1234.5678, 12.5, 0.75}});
  EXPECT_EQ(out.str(), "image_i,image_j,area_m2,angle_deg,weight\n3,7,1234.57,12.5,0.75\n");
}

TEST(Pairs, RandomPairsRoundTripAtSixDigits) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> area(0, 1e5), angle(0, 180), w(0, 1);
  std::vector<PairRecord> pairs;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t i = rng() % 500;
    pairs.push_back({i, i + 1 + rng() % 500, area(rng), angle(rng), w(rng)});
  }
  std::ostringstream out;
  write_pairs(out, pairs);
  const auto back = read(out.str());
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_EQ(back[k].image_i, pairs[k].image_i);
    EXPECT_EQ(back[k].image_j, pairs[k].image_j);
    EXPECT_EQ(back[k].area_m2, round_g6(pairs[k].area_m2));
    EXPECT_EQ(back[k].angle_deg, round_g6(pairs[k].angle_deg));
    EXPECT_EQ(back[k].weight, round_g6(pairs[k].weight));
    EXPECT_LE(std::abs(back[k].area_m2 - pairs[k].area_m2), 5e-6 * pairs[k].area_m2);
  }
  // A second pass is a fixed point.
  std::ostringstream again;
  write_pairs(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Pairs, RejectsNonCanonicalAndMalformedRows) {
  EXPECT_THROW(read("image_i,image_j,area_m2,angle_deg,weight\n4,2,1,1,1\n"), ParseError);
  EXPECT_THROW(read("image_i,image_j,area_m2,angle_deg,weight\n-1,2,1,1,1\n"), ParseError);
  EXPECT_THROW(read("image_i,image_j,area_m2,angle_deg,weight\n1,2,1,1\n"), ParseError);
  std::ostringstream out;
  EXPECT_THROW(write_pairs(out, {{2, 2, 1, 1, 1}}), InvalidArgument);
}

WeightedGraph triangle() {
  WeightedGraph g(std::vector<Vec2>{{0, 0}, {10, 0}, {0, 10}});
  g.add_edge({1, 2, 0.25, 0, 0});
  g.add_edge({0, 1, 1.0, 0, 0});
  g.add_edge({0, 2, 0.5, 0, 0});
  return g;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

TEST(Dot, EmptyGraph) {
  std::ostringstream out;
  export_dot(out, WeightedGraph());
  EXPECT_EQ(out.str(), "graph G {\n}\n");
}

TEST(Dot, TriangleHasThreeNodesAndEdges) {
  std::ostringstream out;
  export_dot(out, triangle(), {"a", "b", "c"});
  const std::string s = out.str();
  EXPECT_EQ(count(s, "[pos="), 3u);
  EXPECT_EQ(count(s, " -- "), 3u);
  EXPECT_NE(s.find("  0 [pos=\"0,0\", label=\"a\"];\n"), std::string::npos);
  // Edges come out in (i, j) order whatever the insertion order.
  EXPECT_LT(s.find("0 -- 1"), s.find("0 -- 2"));
  EXPECT_LT(s.find("0 -- 2"), s.find("1 -- 2"));
  EXPECT_NE(s.find("1 -- 2 [label=\"0.25\"]"), std::string::npos);
  std::ostringstream again;
  export_dot(again, triangle(), {"a", "b", "c"});
  EXPECT_EQ(again.str(), s);
}

std::vector<std::vector<int>> parse_pgm(const std::string& s) {
  std::istringstream in(s);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  EXPECT_EQ(magic, "P2");
  EXPECT_EQ(maxval, 255);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(h), std::vector<int>(static_cast<std::size_t>(w)));
  for (auto& row : m) {
    for (auto& v : row) in >> v;
  }
  EXPECT_TRUE(static_cast<bool>(in));
  return m;
}

TEST(Pgm, SingleVertex) {
  std::ostringstream out;
  export_adjacency_pgm(out, WeightedGraph(1));
  EXPECT_EQ(out.str(), "P2\n1 1\n255\n0\n");
  EXPECT_THROW(export_adjacency_pgm(out, WeightedGraph()), InvalidArgument);
}

TEST(Pgm, UnitEdgeGivesTwoFullCells) {
  WeightedGraph g(4);
  g.add_edge({1, 3, 1.0, 0, 0});
  std::ostringstream out;
  export_adjacency_pgm(out, g);
  const auto m = parse_pgm(out.str());
  int full = 0, other = 0;
  for (const auto& row : m) {
    for (int v : row) (v == 255 ? full : other) += v != 0;
  }
  EXPECT_EQ(full, 2);
  EXPECT_EQ(other, 0);
  EXPECT_EQ(m[1][3], 255);
  EXPECT_EQ(m[3][1], 255);
}

TEST(Pgm, RandomGraphsAreSymmetricAndRounded) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> w(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    WeightedGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng() % 3 == 0) g.add_edge({i, j, w(rng), 0, 0});
      }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::ostringstream out;
    export_adjacency_pgm(out, g, order);
    const auto m = parse_pgm(out.str());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        EXPECT_EQ(m[r][c], m[c][r]);
        const auto e = g.find_edge(order[r], order[c]);
        EXPECT_EQ(m[r][c], e ? static_cast<int>(std::floor(255 * e->weight + 0.5)) : 0);
      }
    }
  }
}

TEST(Stats, EmptyRunIsAllZeros) {
  std::ostringstream out;
  write_stats_json(out, RunStats{});
  const auto j = nlohmann::json::parse(out.str());
  for (const char* k : {"pairs_full", "pairs_reduced", "pairs_graph", "reduction_ratio", "tests_per_image_mean",
                        "components", "registered_images", "rmse_px"}) {
    EXPECT_EQ(j.at(k).get<double>(), 0.0) << k;
  }
  for (const auto& [stage, ms] : j.at("wall_ms").items()) EXPECT_EQ(ms.get<double>(), 0.0) << stage;
}

TEST(Stats, KeySetIsStable) {
  RunStats s;
  s.pairs_full = 100;
  s.pairs_graph = 7;
  s.update_ratio();
  EXPECT_DOUBLE_EQ(s.reduction_ratio, 100.0 / 7.0);
  const nlohmann::json j = to_json(s);
  std::set<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.insert(k);
  const std::set<std::string> expected = {"pairs_full", "pairs_reduced", "pairs_graph", "reduction_ratio",
                                          "tests_per_image_mean", "components", "registered_images",
                                          "rmse_px", "wall_ms", "gcp"};
  EXPECT_EQ(keys, expected);
  std::set<std::string> stages;
  for (const auto& [k, v] : j.at("wall_ms").items()) stages.insert(k);
  EXPECT_EQ(stages, (std::set<std::string>{"pairs", "graph", "ba"}));
}

TEST(Stats, RoundTrips) {
  RunStats s;
  s.pairs_full = 972;
  s.pairs_reduced = 337;
  s.pairs_graph = 116;
  s.update_ratio();
  s.tests_per_image_mean = 36.546666666666667;
  s.components = 1;
  s.registered_images = 75;
  s.rmse_px = 0.43066857834671;
  s.wall_ms["ba"] = 12.25;
  s.gcp = {4, 39, {0.1, -0.2, 1e-7}, {0.3, 0.4, 0.5}, 0.9};
  std::ostringstream out;
  write_stats_json(out, s);
  std::istringstream in(out.str());
  EXPECT_EQ(read_stats_json(in, "s.json"), s);
  std::istringstream bad("{\"pairs_full\": 1}");
  EXPECT_THROW(read_stats_json(bad, "bad.json"), Error);
  std::istringstream junk("not json");
  EXPECT_THROW(read_stats_json(junk, "junk.json"), Error);
}

TEST(ScenePoints, RoundTripBitExactly) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 300);
  std::vector<Vec3> pts;
  for (int k = 0; k < 500; ++k) pts.emplace_back(g(rng), g(rng), g(rng) / 100);
  std::ostringstream out;
  write_scene_points(out, pts);
  std::istringstream in(out.str());
  EXPECT_EQ(read_scene_points(in, "p.csv"), pts);
  std::istringstream gap("point_id,x,y,z\n0,1,2,3\n2,1,2,3\n");
  EXPECT_THROW(read_scene_points(gap, "p.csv"), ParseError);
  std::istringstream dup("point_id,x,y,z\n0,1,2,3\n0,1,2,3\n");
  EXPECT_THROW(read_scene_points(dup, "p.csv"), DuplicateKey);
}

TEST(Gcp, RoundTripsAndValidatesRole) {
  const std::vector<GcpRecord> gcps = {{4, Vec3(1.5, -2.25, 0.1), GcpRole::kControl},
                                       {17, Vec3(1e3 / 3, 2, 3), GcpRole::kCheck}};
  std::ostringstream out;
  write_gcps(out, gcps);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "point_id,x,y,z,role");
  std::istringstream in(out.str());
  EXPECT_EQ(read_gcps(in, "g.csv"), gcps);
  std::istringstream bad("point_id,x,y,z,role\n1,0,0,0,survey\n");
  EXPECT_THROW(read_gcps(bad, "g.csv"), ParseError);
  std::istringstream dup("point_id,x,y,z,role\n1,0,0,0,check\n1,0,0,0,control\n");
  EXPECT_THROW(read_gcps(dup, "g.csv"), DuplicateKey);
}

}  // namespace
}  // namespace uavmg::io
