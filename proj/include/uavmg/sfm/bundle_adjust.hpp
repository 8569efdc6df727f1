#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include "uavmg/sfm/scene.hpp"

namespace uavmg {

struct BaOptions {
  int max_iterations = 100;
  double function_tolerance = 1e-12;  // relative cost decrease on an accepted step
  double parameter_tolerance = 1e-14;
  double initial_damping = 1e-4;
  int local_batch = 5;  // local BA every k registrations (incremental driver)
  // Fix the first observed camera and the length of its longest baseline when
  // fewer than two cameras are otherwise held fixed.
  bool fix_gauge = true;
  std::vector<std::size_t> fixed_points;
  std::vector<std::size_t> fixed_cameras;
  // When non-empty, every other camera is held fixed, and so is every point
  // not seen by one of these cameras.
  std::vector<std::size_t> variable_cameras;

  void validate() const {
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be >= 0");
    if (!(function_tolerance > 0)) throw InvalidArgument("tolerance must be positive");
    if (!(initial_damping > 0)) throw InvalidArgument("damping must be positive");
    if (local_batch < 1) throw InvalidArgument("local batch size must be >= 1");
  }
};

struct BaReport {
  double initial_cost = 0;
  double final_cost = 0;
  double initial_rmse = 0;
  double final_rmse = 0;
  int iterations = 0;
  bool converged = false;
  std::size_t observations = 0;
  std::vector<double> residuals;
};

struct BaResult {
  Scene scene;
  BaReport report;
};

namespace detail {

enum class CameraMode { kFixed, kFree, kBaseline };

class BundleProblem {
 public:
  BundleProblem(Scene scene, const BaOptions& opts) : scene_(std::move(scene)), opts_(opts) {
    opts_.validate();
    scene_.validate(1e9);
    for (const auto& t : scene_.tracks) {
      for (const auto& e : t.elements) obs_.push_back({e.camera, t.point, e.pixel});
    }
    setup_cameras();
    setup_points();
  }

  BaResult solve() {
    BaResult out;
    std::vector<double> res;
    double cost = 0;
    if (!evaluate(scene_, &cost, &res)) {
      // Report the offending observation.
      reprojection_cost(scene_);
    }
    BaReport& rep = out.report;
    rep.observations = obs_.size();
    rep.initial_cost = cost;
    rep.initial_rmse = rmse(cost);

    double lambda = opts_.initial_damping;
    const double tiny = 1e-30 * std::max<std::size_t>(1, obs_.size());
    if (cam_params_ + 3 * free_points_ == 0 || cost <= tiny) rep.converged = true;

    for (int it = 0; it < opts_.max_iterations && !rep.converged; ++it) {
      rep.iterations = it + 1;
      linearize();
      bool accepted = false;
      bool solve_failed = false;
      while (!accepted) {
        Scene trial = scene_;
        double step_norm = 0;
        double param_norm = 0;
        solve_failed = !step(lambda, &trial, &step_norm, &param_norm);
        if (solve_failed) {
          lambda *= 10;
        } else {
          double new_cost = 0;
          if (evaluate(trial, &new_cost, nullptr) && new_cost < cost) {
            const double decrease = (cost - new_cost) / cost;
            scene_ = std::move(trial);
            cost = new_cost;
            lambda = std::max(lambda / 3.0, 1e-15);
            accepted = true;
            if (decrease < opts_.function_tolerance || cost <= tiny ||
                step_norm <= opts_.parameter_tolerance * (param_norm + opts_.parameter_tolerance)) {
              rep.converged = true;
            }
          } else {
            lambda *= 4;
          }
        }
        if (!accepted && lambda > 1e16) {
          if (solve_failed) throw SingularSystem("normal equations stay singular under damping");
          // No descent left at working precision.
          rep.converged = true;
          break;
        }
      }
    }
    std::vector<double> final_res;
    evaluate(scene_, &cost, &final_res);
    rep.final_cost = cost;
    rep.final_rmse = rmse(cost);
    rep.residuals = std::move(final_res);
    out.scene = std::move(scene_);
    return out;
  }

 private:
  struct Obs {
    std::size_t camera;
    std::size_t point;
    Vec2 pixel;
  };
  using CamJac = Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, 6>;
  using CrossBlock = Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 6, 3>;

  double rmse(double cost) const {
    return obs_.empty() ? 0.0 : std::sqrt(cost / (2.0 * static_cast<double>(obs_.size())));
  }

  void setup_cameras() {
    const std::size_t nc = scene_.cameras.size();
    std::vector<bool> observed(nc, false);
    for (const auto& o : obs_) observed[o.camera] = true;
    mode_.assign(nc, CameraMode::kFree);
    for (std::size_t c = 0; c < nc; ++c) {
      if (!observed[c]) mode_[c] = CameraMode::kFixed;
    }
    if (!opts_.variable_cameras.empty()) {
      std::vector<bool> var(nc, false);
      for (auto c : opts_.variable_cameras) {
        if (c >= nc) throw InvalidArgument("variable camera out of range");
        var[c] = true;
      }
      for (std::size_t c = 0; c < nc; ++c) {
        if (!var[c]) mode_[c] = CameraMode::kFixed;
      }
    }
    for (auto c : opts_.fixed_cameras) {
      if (c >= nc) throw InvalidArgument("fixed camera out of range");
      mode_[c] = CameraMode::kFixed;
    }
    if (opts_.fix_gauge) {
      std::vector<std::size_t> anchors;
      for (std::size_t c = 0; c < nc; ++c) {
        if (observed[c] && mode_[c] == CameraMode::kFixed) anchors.push_back(c);
      }
      if (anchors.empty()) {
        for (std::size_t c = 0; c < nc; ++c) {
          if (mode_[c] == CameraMode::kFree) {
            mode_[c] = CameraMode::kFixed;
            anchors.push_back(c);
            break;
          }
        }
      }
      if (anchors.size() == 1) {
        // Scale comes from the longest baseline to the anchor; co-located
        // rig cameras would otherwise pin it to prior noise.
        const Vec3 c0 = scene_.cameras[anchors[0]].pose.translation;
        std::size_t best = nc;
        double best_len = 1e-6;
        for (std::size_t c = 0; c < nc; ++c) {
          if (mode_[c] != CameraMode::kFree) continue;
          const double len = (scene_.cameras[c].pose.translation - c0).norm();
          if (len > best_len) {
            best_len = len;
            best = c;
          }
        }
        if (best < nc) {
          mode_[best] = CameraMode::kBaseline;
          anchor_center_ = c0;
          baseline_length_ = best_len;
        }
      }
    }
    offset_.assign(nc, 0);
    dim_.assign(nc, 0);
    for (std::size_t c = 0; c < nc; ++c) {
      dim_[c] = mode_[c] == CameraMode::kFree ? 6 : mode_[c] == CameraMode::kBaseline ? 5 : 0;
      offset_[c] = cam_params_;
      cam_params_ += dim_[c];
    }
  }

  void setup_points() {
    const std::size_t np = scene_.points.size();
    point_free_.assign(np, false);
    std::vector<int> seen(np, 0);
    std::vector<bool> touched_by_variable(np, false);
    for (const auto& o : obs_) {
      ++seen[o.point];
      if (mode_[o.camera] != CameraMode::kFixed) touched_by_variable[o.point] = true;
    }
    std::set<std::size_t> fixed(opts_.fixed_points.begin(), opts_.fixed_points.end());
    for (std::size_t p = 0; p < np; ++p) {
      if (seen[p] == 0 || fixed.count(p)) continue;
      if (!opts_.variable_cameras.empty() && !touched_by_variable[p]) continue;
      if (seen[p] < 2) throw InvalidArgument("point " + std::to_string(p) + " has fewer than 2 observations");
      point_free_[p] = true;
      ++free_points_;
    }
    point_obs_.assign(np, {});
    for (std::size_t k = 0; k < obs_.size(); ++k) point_obs_[obs_[k].point].push_back(k);
  }

  Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& u) const {
    const Vec3 a = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 t1 = u.cross(a).normalized();
    const Vec3 t2 = u.cross(t1).normalized();
    Eigen::Matrix<double, 3, 2> t;
    t.col(0) = t1;
    t.col(1) = t2;
    return t;
  }

  bool evaluate(const Scene& s, double* cost, std::vector<double>* res) const {
    *cost = 0;
    if (res) res->clear();
    bool ok = true;
    for (const auto& o : obs_) {
      Vec2 px;
      if (!project(s.cameras[o.camera], s.points[o.point], &px)) {
        ok = false;
        *cost = std::numeric_limits<double>::infinity();
        if (!res) return false;
        continue;
      }
      const Vec2 d = px - o.pixel;
      *cost += d.squaredNorm();
      if (res) {
        res->push_back(d.x());
        res->push_back(d.y());
      }
    }
    return ok;
  }

  void linearize() {
    const std::size_t np = scene_.points.size();
    U_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cam_params_), static_cast<Eigen::Index>(cam_params_));
    gc_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cam_params_));
    V_.assign(np, Mat3::Zero());
    gp_.assign(np, Vec3::Zero());
    W_.assign(obs_.size(), CrossBlock());
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      const Obs& o = obs_[k];
      const Camera& cam = scene_.cameras[o.camera];
      Vec2 px;
      CameraJacobian jc;
      PointJacobian jp;
      project(cam, scene_.points[o.point], &px, &jc, &jp);
      const Vec2 r = px - o.pixel;
      const int d = dim_[o.camera];
      CamJac jl(2, d);
      if (mode_[o.camera] == CameraMode::kFree) {
        jl = jc;
      } else if (mode_[o.camera] == CameraMode::kBaseline) {
        const Vec3 u = (cam.pose.translation - anchor_center_).normalized();
        jl.leftCols(3) = jc.leftCols<3>();
        jl.rightCols(2) = jc.rightCols<3>() * (baseline_length_ * tangent_basis(u));
      }
      if (d > 0) {
        const auto off = static_cast<Eigen::Index>(offset_[o.camera]);
        U_.block(off, off, d, d).noalias() += jl.transpose() * jl;
        gc_.segment(off, d).noalias() += jl.transpose() * r;
      }
      if (point_free_[o.point]) {
        V_[o.point].noalias() += jp.transpose() * jp;
        gp_[o.point].noalias() += jp.transpose() * r;
        if (d > 0) W_[k] = jl.transpose() * jp;
      }
    }
  }

  // Damped Gauss-Newton step via the reduced camera system.
  bool step(double lambda, Scene* trial, double* step_norm, double* param_norm) const {
    const auto n = static_cast<Eigen::Index>(cam_params_);
    Eigen::MatrixXd S = U_;
    for (Eigen::Index i = 0; i < n; ++i) S(i, i) += lambda * std::max(U_(i, i), 1e-12);
    Eigen::VectorXd rhs = -gc_;
    std::vector<Mat3> vinv(scene_.points.size());
    for (std::size_t p = 0; p < scene_.points.size(); ++p) {
      if (!point_free_[p]) continue;
      Mat3 v = V_[p];
      for (int i = 0; i < 3; ++i) v(i, i) += lambda * std::max(V_[p](i, i), 1e-12);
      Eigen::LLT<Mat3> llt(v);
      if (llt.info() != Eigen::Success) return false;
      vinv[p] = llt.solve(Mat3::Identity());
      if (n == 0) continue;
      for (std::size_t a : point_obs_[p]) {
        const int da = dim_[obs_[a].camera];
        if (da == 0) continue;
        const auto oa = static_cast<Eigen::Index>(offset_[obs_[a].camera]);
        const CrossBlock wv = W_[a] * vinv[p];
        rhs.segment(oa, da).noalias() += wv * gp_[p];
        for (std::size_t b : point_obs_[p]) {
          const int db = dim_[obs_[b].camera];
          if (db == 0) continue;
          const auto ob = static_cast<Eigen::Index>(offset_[obs_[b].camera]);
          S.block(oa, ob, da, db).noalias() -= wv * W_[b].transpose();
        }
      }
    }
    Eigen::VectorXd dc;
    if (n > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      if (llt.info() != Eigen::Success) return false;
      dc = llt.solve(rhs);
      if (!dc.allFinite()) return false;
    }
    double sn = n > 0 ? dc.squaredNorm() : 0.0;
    double pn = 0;
    for (std::size_t c = 0; c < scene_.cameras.size(); ++c) {
      if (dim_[c] == 0) continue;
      const auto off = static_cast<Eigen::Index>(offset_[c]);
      CameraPose& pose = trial->cameras[c].pose;
      pn += pose.translation.squaredNorm();
      pose.rotation = Rotation::exp(dc.segment<3>(off)) * pose.rotation;
      if (mode_[c] == CameraMode::kFree) {
        pose.translation += dc.segment<3>(off + 3);
      } else {
        const Vec3 u = (pose.translation - anchor_center_).normalized();
        const Vec3 moved = (u + tangent_basis(u) * dc.segment<2>(off + 3)).normalized();
        pose.translation = anchor_center_ + baseline_length_ * moved;
      }
    }
    for (std::size_t p = 0; p < scene_.points.size(); ++p) {
      if (!point_free_[p]) continue;
      Vec3 g = -gp_[p];
      for (std::size_t a : point_obs_[p]) {
        const int da = dim_[obs_[a].camera];
        if (da == 0) continue;
        g.noalias() -= W_[a].transpose() * dc.segment(static_cast<Eigen::Index>(offset_[obs_[a].camera]), da);
      }
      const Vec3 dp = vinv[p] * g;
      if (!dp.allFinite()) return false;
      sn += dp.squaredNorm();
      pn += trial->points[p].squaredNorm();
      trial->points[p] += dp;
    }
    *step_norm = std::sqrt(sn);
    *param_norm = std::sqrt(pn);
    return true;
  }

  Scene scene_;
  BaOptions opts_;
  std::vector<Obs> obs_;
  std::vector<CameraMode> mode_;
  std::vector<std::size_t> offset_;
  std::vector<int> dim_;
  std::size_t cam_params_ = 0;
  Vec3 anchor_center_ = Vec3::Zero();
  double baseline_length_ = 0;
  std::vector<bool> point_free_;
  std::size_t free_points_ = 0;
  std::vector<std::vector<std::size_t>> point_obs_;

  Eigen::MatrixXd U_;
  Eigen::VectorXd gc_;
  std::vector<Mat3> V_;
  std::vector<Vec3> gp_;
  std::vector<CrossBlock> W_;
};

}  // namespace detail

// Levenberg-Marquardt over camera rotations (minimal left increments),
// camera centers and points. Intrinsics stay fixed.
inline BaResult bundle_adjust(Scene scene, const BaOptions& opts = {}) {
  return detail::BundleProblem(std::move(scene), opts).solve();
}

struct GroundControlPoint {
  std::size_t point = 0;
  Vec3 position = Vec3::Zero();
};

// Holds the control points exactly at their surveyed coordinates and frees
// every camera, leaving no gauge freedom.
inline BaResult bundle_adjust_gcp(Scene scene, const std::vector<GroundControlPoint>& gcps,
                                  BaOptions opts = {}) {
  if (gcps.size() < 3) throw UnderConstrained("at least 3 ground control points are required");
  Vec3 mean = Vec3::Zero();
  for (const auto& g : gcps) mean += g.position;
  mean /= static_cast<double>(gcps.size());
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(gcps.size()), 3);
  for (std::size_t k = 0; k < gcps.size(); ++k) centered.row(static_cast<Eigen::Index>(k)) = (gcps[k].position - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-6 * std::max(sv(0), 1e-300))) {
    throw UnderConstrained("ground control points are collinear");
  }
  opts.fixed_points.clear();
  for (const auto& g : gcps) {
    if (g.point >= scene.points.size()) throw InvalidArgument("control point index out of range");
    scene.points[g.point] = g.position;
    opts.fixed_points.push_back(g.point);
  }
  opts.fix_gauge = false;
  opts.fixed_cameras.clear();
  opts.variable_cameras.clear();
  return bundle_adjust(std::move(scene), opts);
}

}  // namespace uavmg
