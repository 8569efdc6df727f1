#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "uavmg/sfm/scene.hpp"

namespace uavmg {

// World-frame unit ray through a pixel.
inline Vec3 pixel_ray(const Camera& cam, const Vec2& px) {
  const Intrinsics& in = cam.intrinsics;
  const Vec3 d((px.x() - in.cx_px()) / in.fx_px(), -(px.y() - in.cy_px()) / in.fy_px(), -1.0);
  return (cam.pose.rotation.matrix().transpose() * d).normalized();
}

// Least-squares ray intersection (generalized midpoint) refined by
// Gauss-Newton on the reprojection error of the point alone.
inline Vec3 triangulate(std::span<const TrackElement> obs, std::span<const Camera> cameras,
                        int refine_iterations = 10) {
  if (obs.size() < 2) throw DegenerateGeometry("triangulation needs two observations");
  std::vector<Vec3> centers;
  std::vector<Vec3> rays;
  for (const auto& e : obs) {
    if (e.camera >= cameras.size()) throw InvalidArgument("observation references a missing camera");
    centers.push_back(cameras[e.camera].pose.translation);
    rays.push_back(pixel_ray(cameras[e.camera], e.pixel));
  }
  double max_baseline = 0;
  double max_parallax = 0;
  for (std::size_t a = 0; a < obs.size(); ++a) {
    for (std::size_t b = a + 1; b < obs.size(); ++b) {
      max_baseline = std::max(max_baseline, (centers[a] - centers[b]).norm());
      max_parallax = std::max(max_parallax, rays[a].cross(rays[b]).norm());
    }
  }
  if (!(max_baseline > 1e-9)) throw DegenerateGeometry("observations share one projection center");
  if (!(max_parallax > 1e-12)) throw DegenerateGeometry("observation rays are parallel");

  Mat3 A = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const Mat3 P = Mat3::Identity() - rays[k] * rays[k].transpose();
    A += P;
    b += P * centers[k];
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(A);
  if (!(es.eigenvalues()(0) > 1e-14 * es.eigenvalues()(2))) {
    throw DegenerateGeometry("ray configuration does not fix the point");
  }
  Vec3 X = A.ldlt().solve(b);

  auto cost_at = [&](const Vec3& p, double* cost) {
    *cost = 0;
    for (const auto& e : obs) {
      Vec2 px;
      if (!project(cameras[e.camera], p, &px)) return false;
      *cost += (px - e.pixel).squaredNorm();
    }
    return true;
  };
  double cost = 0;
  if (!cost_at(X, &cost)) return X;
  for (int it = 0; it < refine_iterations; ++it) {
    Mat3 H = Mat3::Zero();
    Vec3 g = Vec3::Zero();
    for (const auto& e : obs) {
      Vec2 px;
      PointJacobian J;
      project(cameras[e.camera], X, &px, nullptr, &J);
      H += J.transpose() * J;
      g += J.transpose() * (px - e.pixel);
    }
    const Vec3 dx = H.ldlt().solve(-g);
    double c2 = 0;
    if (!dx.allFinite() || !cost_at(X + dx, &c2) || !(c2 < cost)) break;
    X += dx;
    const bool done = cost - c2 <= 1e-14 * cost;
    cost = c2;
    if (done) break;
  }
  return X;
}

}  // namespace uavmg
