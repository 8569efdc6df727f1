#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "uavmg/errors.hpp"
#include "uavmg/sfm/camera.hpp"

namespace uavmg {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct Observation {
  std::size_t camera = 0;
  std::size_t point = 0;
  Vec2 pixel = Vec2::Zero();
};

struct TrackElement {
  std::size_t camera = 0;
  std::size_t feature = kNoIndex;
  Vec2 pixel = Vec2::Zero();
};

// Observations of one 3-D point, at most one per camera.
struct Track {
  std::size_t point = kNoIndex;
  std::vector<TrackElement> elements;
};

// Cameras, points and the tracks tying them together. Track k observes
// points[tracks[k].point]; visibility (rho) is implied by the tracks.
struct Scene {
  std::vector<Camera> cameras;
  std::vector<Vec3> points;
  std::vector<Track> tracks;

  std::vector<Observation> observations() const {
    std::vector<Observation> obs;
    for (const auto& t : tracks) {
      for (const auto& e : t.elements) obs.push_back({e.camera, t.point, e.pixel});
    }
    return obs;
  }

  std::size_t observation_count() const {
    std::size_t n = 0;
    for (const auto& t : tracks) n += t.elements.size();
    return n;
  }

  void validate(double margin_px = 0.0) const {
    for (const auto& t : tracks) {
      if (t.point >= points.size()) throw InvalidArgument("track references a missing point");
      for (std::size_t a = 0; a < t.elements.size(); ++a) {
        const auto& e = t.elements[a];
        if (e.camera >= cameras.size()) throw InvalidArgument("observation references a missing camera");
        const Intrinsics& in = cameras[e.camera].intrinsics;
        if (e.pixel.x() < -margin_px || e.pixel.y() < -margin_px ||
            e.pixel.x() > in.image_width_px + margin_px || e.pixel.y() > in.image_height_px + margin_px) {
          throw InvalidArgument("observation outside the image");
        }
        for (std::size_t b = 0; b < a; ++b) {
          if (t.elements[b].camera == e.camera) throw InvalidArgument("track observes a camera twice");
        }
      }
    }
  }
};

inline Vec2 project_point(const Camera& cam, const Vec3& X) {
  Vec2 px;
  if (!project(cam, X, &px)) throw BehindCamera("point is behind the camera", -1, -1);
  return px;
}

struct CostReport {
  double cost = 0;
  double rmse = 0;  // per coordinate: sqrt(cost / (2 * observations))
  std::vector<double> residuals;
};

// Sum over visible (point, camera) pairs of the squared pixel residual.
inline CostReport reprojection_cost(const Scene& scene) {
  CostReport r;
  r.residuals.reserve(2 * scene.observation_count());
  for (const auto& t : scene.tracks) {
    for (const auto& e : t.elements) {
      Vec2 px;
      if (!project(scene.cameras[e.camera], scene.points[t.point], &px)) {
        throw BehindCamera("observed point is behind camera " + std::to_string(e.camera) +
                               " (point " + std::to_string(t.point) + ")",
                           static_cast<int>(e.camera), static_cast<int>(t.point));
      }
      const Vec2 d = px - e.pixel;
      r.residuals.push_back(d.x());
      r.residuals.push_back(d.y());
      r.cost += d.squaredNorm();
    }
  }
  if (!r.residuals.empty()) r.rmse = std::sqrt(r.cost / static_cast<double>(r.residuals.size()));
  return r;
}

}  // namespace uavmg
