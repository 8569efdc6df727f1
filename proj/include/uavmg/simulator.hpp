#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "uavmg/geo_core.hpp"
#include "uavmg/sfm/scene.hpp"
#include "uavmg/sfm/tracks.hpp"

namespace uavmg {

struct RigCamera {
  std::string name;
  CameraMount mount;
  Intrinsics intrinsics;
};

struct RigPreset {
  std::string id;
  std::vector<RigCamera> cameras;
  // Acquisition defaults for the preset's test site.
  double flight_height = 100;
  double forward_overlap = 0.8;
  double side_overlap = 0.6;

  const RigCamera& camera(std::string_view name) const {
    for (const auto& c : cameras) {
      if (c.name == name) return c;
    }
    throw InvalidArgument("rig " + id + " has no camera named " + std::string(name));
  }

  std::size_t camera_index(std::string_view name) const {
    for (std::size_t k = 0; k < cameras.size(); ++k) {
      if (cameras[k].name == name) return k;
    }
    throw InvalidArgument("rig " + id + " has no camera named " + std::string(name));
  }
};

// single-oblique | dual | penta: one Sony RX1R at pitch 25 / roll -15;
// the same front camera plus a back camera at roll -25; a Sony NEX-7 nadir
// (16 mm) and four 35 mm obliques tilted 45 degrees.
inline RigPreset rig_preset(std::string_view name) {
  const Intrinsics rx1r(35.0, 35.8, 23.9, 6000, 4000);
  if (name == "single-oblique") {
    return {"single-oblique", {{"front", CameraMount::from_angles(0, 25, -15), rx1r}}, 165, 0.85, 0.45};
  }
  if (name == "dual") {
    return {"dual",
            {{"front", CameraMount::from_angles(0, 25, -15), rx1r},
             {"back", CameraMount::from_angles(0, 0, -25), rx1r}},
            120, 0.85, 0.50};
  }
  if (name == "penta") {
    const Intrinsics nadir(16.0, 23.4, 15.6, 6000, 4000);
    const Intrinsics oblique(35.0, 23.4, 15.6, 6000, 4000);
    return {"penta",
            {{"nadir", CameraMount::from_angles(0, 0, 0), nadir},
             {"forward", CameraMount::from_angles(0, -45, 0), oblique},
             {"backward", CameraMount::from_angles(0, 45, 0), oblique},
             {"left", CameraMount::from_angles(0, 0, 45), oblique},
             {"right", CameraMount::from_angles(0, 0, -45), oblique}},
            175, 0.75, 0.70};
  }
  throw InvalidArgument("unknown rig preset: " + std::string(name));
}

inline const std::vector<std::string>& rig_preset_names() {
  static const std::vector<std::string> names = {"single-oblique", "dual", "penta"};
  return names;
}

struct FlightConfig {
  double flight_height = 100;  // m above the elevation plane
  double forward_overlap = 0.8;
  double side_overlap = 0.6;
  int strips = 1;
  int stations = 1;
  bool serpentine = true;
  std::uint64_t seed = 0;
  double elevation = 0;
  // GNSS/IMU-style irregularity; zero gives a perfect grid.
  double position_jitter_m = 0;
  double attitude_jitter_deg = 0;

  static FlightConfig from_preset(const RigPreset& rig, int strips, int stations) {
    FlightConfig c;
    c.flight_height = rig.flight_height;
    c.forward_overlap = rig.forward_overlap;
    c.side_overlap = rig.side_overlap;
    c.strips = strips;
    c.stations = stations;
    return c;
  }

  void validate() const {
    if (!(forward_overlap >= 0 && forward_overlap <= 0.95) || !(side_overlap >= 0 && side_overlap <= 0.95)) {
      throw InvalidArgument("overlaps must be in [0, 0.95]");
    }
    if (strips < 1 || stations < 1) throw InvalidArgument("strips and stations must be >= 1");
    if (!(flight_height > 0)) throw InvalidArgument("flight height must be positive");
  }
};

struct FlightImage {
  std::string image_id;
  std::size_t camera = 0;  // index into the rig
  int strip = 0;
  int station = 0;
  PlatformPose platform;
  double yaw_deg = 0;  // navigation attitude behind `platform`
  double pitch_deg = 0;
  double roll_deg = 0;
};

// Index of the camera whose optical axis is closest to nadir.
inline std::size_t nadir_most_camera(const RigPreset& rig) {
  std::size_t best = 0;
  double best_z = 2;
  for (std::size_t k = 0; k < rig.cameras.size(); ++k) {
    const double z = (rig.cameras[k].mount.rotation.matrix().transpose() * Vec3(0, 0, -1)).z();
    if (z < best_z) {
      best_z = z;
      best = k;
    }
  }
  return best;
}

struct FlightSpacing {
  double along_track = 0;  // station spacing, m
  double across_track = 0; // strip spacing, m
  double footprint_length = 0;
  double footprint_width = 0;
};

// Length of the line through `p` along `dir` inside a convex polygon.
inline double chord_length(const ConvexPolygon& poly, const Vec2& p, const Vec2& dir) {
  const Vec2 u = dir.normalized();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Vec2 a = v[i];
    const Vec2 e = v[(i + 1) % n] - a;
    // Inside is to the left of each CCW edge: cross(e, x - a) >= 0.
    const double num = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    const double den = e.x() * u.y() - e.y() * u.x();
    if (std::abs(den) < 1e-15) {
      if (num < 0) return 0;
      continue;
    }
    const double t = -num / den;
    if (den > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  return std::max(0.0, hi - lo);
}

// Spacing from the nadir-most camera's footprint with level flight: chords
// through the footprint center along and across track.
inline FlightSpacing flight_spacing(const FlightConfig& config, const RigPreset& rig) {
  config.validate();
  if (rig.cameras.empty()) throw InvalidArgument("rig has no cameras");
  const RigCamera& cam = rig.cameras[nadir_most_camera(rig)];
  const PlatformPose level{Rotation(), Vec3(0, 0, config.elevation + config.flight_height)};
  const Footprint fp = project_footprint(compose_camera_pose(level, cam.mount), cam.intrinsics, config.elevation);
  FlightSpacing s;
  s.footprint_length = chord_length(fp.polygon, fp.center, Vec2::UnitX());
  s.footprint_width = chord_length(fp.polygon, fp.center, Vec2::UnitY());
  s.along_track = s.footprint_length * (1.0 - config.forward_overlap);
  s.across_track = s.footprint_width * (1.0 - config.side_overlap);
  return s;
}

// Strips run along world +x and step along +y. On a serpentine plan odd
// strips are flown back along -x with the heading turned by 180 degrees.
// Images are ordered strip, then station in flight order, then camera.
inline std::vector<FlightImage> generate_flight(const FlightConfig& config, const RigPreset& rig) {
  const FlightSpacing sp = flight_spacing(config, rig);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FlightImage> images;
  images.reserve(static_cast<std::size_t>(config.strips * config.stations) * rig.cameras.size());
  for (int s = 0; s < config.strips; ++s) {
    const bool reverse = config.serpentine && (s % 2 == 1);
    for (int t = 0; t < config.stations; ++t) {
      const int along = reverse ? config.stations - 1 - t : t;
      Vec3 pos(along * sp.along_track, s * sp.across_track, config.elevation + config.flight_height);
      double yaw = reverse ? 180.0 : 0.0;
      double pitch = 0;
      double roll = 0;
      if (config.position_jitter_m > 0) {
        for (int k = 0; k < 3; ++k) pos[k] += config.position_jitter_m * gauss(rng);
      }
      if (config.attitude_jitter_deg > 0) {
        yaw += config.attitude_jitter_deg * gauss(rng);
        pitch += config.attitude_jitter_deg * gauss(rng);
        roll += config.attitude_jitter_deg * gauss(rng);
      }
      const PlatformPose platform = PlatformPose::from_attitude(yaw, pitch, roll, pos);
      for (std::size_t c = 0; c < rig.cameras.size(); ++c) {
        char id[64];
        std::snprintf(id, sizeof id, "S%02d_T%03d_%s", s, along, rig.cameras[c].name.c_str());
        images.push_back({id, c, s, along, platform, yaw, pitch, roll});
      }
    }
  }
  return images;
}

inline std::vector<Camera> flight_cameras(const std::vector<FlightImage>& flight, const RigPreset& rig) {
  std::vector<Camera> cams;
  cams.reserve(flight.size());
  for (const auto& img : flight) {
    const RigCamera& rc = rig.cameras.at(img.camera);
    cams.push_back({compose_camera_pose(img.platform, rc.mount, static_cast<int>(img.camera), img.station),
                    rc.intrinsics});
  }
  return cams;
}

inline std::vector<Footprint> camera_footprints(const std::vector<Camera>& cams, double elevation) {
  std::vector<Footprint> fps;
  fps.reserve(cams.size());
  for (const auto& c : cams) fps.push_back(project_footprint(c.pose, c.intrinsics, elevation));
  return fps;
}

struct SyntheticScene {
  std::vector<Vec3> points;
  std::uint64_t seed = 0;
};

struct GroundRect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

// Jittered-grid sampling: round(w*sqrt(d)) x round(h*sqrt(d)) cells with one
// point each, so the count is exact for a given extent and density.
inline SyntheticScene generate_scene(const GroundRect& extent, double density, std::uint64_t seed,
                                     double elevation = 0, double height_jitter = 0) {
  if (!(density > 0)) throw InvalidArgument("density must be positive");
  const double w = extent.max.x() - extent.min.x();
  const double h = extent.max.y() - extent.min.y();
  if (!(w > 0 && h > 0)) throw InvalidArgument("scene extent must have positive size");
  const auto nx = static_cast<long>(std::lround(w * std::sqrt(density)));
  const auto ny = static_cast<long>(std::lround(h * std::sqrt(density)));
  SyntheticScene scene;
  scene.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  scene.points.reserve(static_cast<std::size_t>(std::max(0L, nx * ny)));
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      const double x = extent.min.x() + (ix + unit(rng)) * w / static_cast<double>(nx);
      const double y = extent.min.y() + (iy + unit(rng)) * h / static_cast<double>(ny);
      const double z = elevation + (height_jitter > 0 ? height_jitter * gauss(rng) : 0.0);
      scene.points.emplace_back(x, y, z);
    }
  }
  return scene;
}

inline GroundRect footprint_extent(const std::vector<Footprint>& fps, double margin = 0) {
  GroundRect r{Vec2::Constant(std::numeric_limits<double>::infinity()),
               Vec2::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& f : fps) {
    const Envelope e = f.polygon.envelope();
    r.min = r.min.cwiseMin(e.min);
    r.max = r.max.cwiseMax(e.max);
  }
  r.min -= Vec2::Constant(margin);
  r.max += Vec2::Constant(margin);
  return r;
}

struct ObservationOptions {
  double noise_px = 0;
  std::uint64_t seed = 0;
  // Pairs whose intersection angle exceeds this get no matches.
  double matchability_cutoff_deg = 90.0;
  double elevation = 0;
  // Fraction of co-visible pairs whose matching "fails"; a failed pair keeps
  // at most `failed_pair_matches` matches.
  double pair_failure_rate = 0;
  std::size_t failed_pair_matches = 0;
};

struct SimulatedObservations {
  FeatureTable features;                          // noisy pixels per image
  std::vector<std::vector<std::size_t>> feature_point;  // ground-truth point per feature
  std::vector<PairMatches> matches;               // sorted by (image_a, image_b)

  std::size_t match_count(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(matches.begin(), matches.end(), std::make_pair(a, b),
                               [](const PairMatches& m, const std::pair<std::size_t, std::size_t>& k) {
                                 return std::make_pair(m.image_a, m.image_b) < k;
                               });
    if (it == matches.end() || it->image_a != a || it->image_b != b) return 0;
    return it->matches.size();
  }
};

// Projects every point into every camera that sees it in frame, adds
// isotropic Gaussian pixel noise and derives pairwise matches from
// co-visibility.
inline SimulatedObservations simulate_observations(const std::vector<Camera>& cameras,
                                                   const std::vector<Vec3>& points,
                                                   const ObservationOptions& opts) {
  if (!(opts.noise_px >= 0)) throw InvalidArgument("noise sigma must be non-negative");
  SimulatedObservations out;
  const std::size_t nc = cameras.size();
  out.features.assign(nc, {});
  out.feature_point.assign(nc, {});
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // feature index of each point per camera
  std::vector<std::vector<std::size_t>> seen_by(points.size());
  std::vector<std::vector<std::size_t>> feature_of(points.size());
  for (std::size_t c = 0; c < nc; ++c) {
    const Intrinsics& in = cameras[c].intrinsics;
    for (std::size_t p = 0; p < points.size(); ++p) {
      Vec2 px;
      if (!project(cameras[c], points[p], &px)) continue;
      if (px.x() < 0 || px.y() < 0 || px.x() >= in.image_width_px || px.y() >= in.image_height_px) continue;
      if (opts.noise_px > 0) {
        px.x() += opts.noise_px * gauss(rng);
        px.y() += opts.noise_px * gauss(rng);
      }
      seen_by[p].push_back(c);
      feature_of[p].push_back(out.features[c].size());
      out.features[c].push_back(px);
      out.feature_point[c].push_back(p);
    }
  }

  std::vector<Vec3> view(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    try {
      view[c] = project_footprint(cameras[c].pose, cameras[c].intrinsics, opts.elevation).view_direction;
    } catch (const DegenerateGeometry&) {
      view[c] = cameras[c].pose.optical_axis();
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<FeatureMatch>> pairs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t a = 0; a < seen_by[p].size(); ++a) {
      for (std::size_t b = a + 1; b < seen_by[p].size(); ++b) {
        pairs[{seen_by[p][a], seen_by[p][b]}].push_back({feature_of[p][a], feature_of[p][b]});
      }
    }
  }
  std::mt19937_64 fail_rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& [key, list] : pairs) {
    const double angle =
        std::acos(std::clamp(view[key.first].dot(view[key.second]), -1.0, 1.0)) * kRadToDeg;
    const bool failed = opts.pair_failure_rate > 0 && unit(fail_rng) < opts.pair_failure_rate;
    if (angle > opts.matchability_cutoff_deg) continue;
    if (failed) list.resize(std::min(list.size(), opts.failed_pair_matches));
    if (list.empty()) continue;
    out.matches.push_back({key.first, key.second, std::move(list)});
  }
  return out;
}

// Gaussian position noise (sigma_pos per axis, m) and a rotation about a
// uniformly random axis by an angle drawn from N(0, sigma_ang) degrees,
// applied on the world side.
inline std::vector<Camera> perturb_priors(std::vector<Camera> cameras, double sigma_pos,
                                          double sigma_ang_deg, std::uint64_t seed) {
  if (!(sigma_pos >= 0) || !(sigma_ang_deg >= 0)) throw InvalidArgument("sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& cam : cameras) {
    Vec3 dp(gauss(rng), gauss(rng), gauss(rng));
    Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    const double angle = gauss(rng) * sigma_ang_deg * kDegToRad;
    if (sigma_pos > 0) cam.pose.translation += sigma_pos * dp;
    if (sigma_ang_deg > 0 && axis.norm() > 0) {
      cam.pose.rotation = cam.pose.rotation * Rotation::exp(axis.normalized() * angle);
    }
  }
  return cameras;
}

}  // namespace uavmg
