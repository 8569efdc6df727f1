#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "uavmg/geo/rotation.hpp"

namespace uavmg {

namespace detail {

inline double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline double signed_area(std::span<const Vec2> pts) {
  double twice = 0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

}  // namespace detail

struct Envelope {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

// Counter-clockwise, strictly convex up to a 1e-9 m collinearity tolerance.
class ConvexPolygon {
 public:
  static constexpr double kCollinearTolerance = 1e-9;

  explicit ConvexPolygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 3) throw InvalidArgument("convex polygon needs at least 3 vertices");
    for (const auto& p : v_) {
      if (!p.allFinite()) throw InvalidArgument("polygon vertex is not finite");
    }
    if (detail::signed_area(v_) <= 0) {
      throw InvalidArgument("polygon must be counter-clockwise with positive area");
    }
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = v_[i];
      const Vec2& b = v_[(i + 1) % n];
      const Vec2& c = v_[(i + 2) % n];
      // Distance of c from the line through (a, b).
      const double len = (b - a).norm();
      if (len <= 0 || detail::cross(a, b, c) / len < -kCollinearTolerance) {
        throw InvalidArgument("polygon is not convex");
      }
    }
  }

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }

  double area() const { return detail::signed_area(v_); }

  Vec2 centroid() const {
    // Shift to the first vertex for conditioning on georeferenced inputs.
    const Vec2 o = v_.front();
    double a2 = 0;
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0, n = v_.size(); i < n; ++i) {
      const Vec2 p = v_[i] - o;
      const Vec2 q = v_[(i + 1) % n] - o;
      const double w = p.x() * q.y() - q.x() * p.y();
      a2 += w;
      c += w * (p + q);
    }
    return o + c / (3.0 * a2);
  }

  Envelope envelope() const {
    Envelope e{v_.front(), v_.front()};
    for (const auto& p : v_) {
      e.min = e.min.cwiseMin(p);
      e.max = e.max.cwiseMax(p);
    }
    return e;
  }

  // Closed containment test; `strict` excludes points within 1e-9 m of an edge.
  bool contains(const Vec2& p, bool strict = false) const {
    for (std::size_t i = 0, n = v_.size(); i < n; ++i) {
      const Vec2& a = v_[i];
      const Vec2& b = v_[(i + 1) % n];
      const double d = detail::cross(a, b, p) / (b - a).norm();
      if (strict ? d <= kCollinearTolerance : d < -kCollinearTolerance) return false;
    }
    return true;
  }

 private:
  std::vector<Vec2> v_;
};

// Andrew's monotone chain. Collinear boundary points are dropped.
inline ConvexPolygon convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) throw DegenerateGeometry("convex hull needs 3 distinct points");

  std::vector<Vec2> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && detail::cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3 || detail::signed_area(hull) <= 0) {
    throw DegenerateGeometry("all points are collinear");
  }
  // Exact-zero cross products are removed above; near-collinear survivors are
  // removed here so the result meets the polygon tolerance.
  for (bool changed = true; changed && hull.size() > 3;) {
    changed = false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2& a = hull[(i + hull.size() - 1) % hull.size()];
      const Vec2& c = hull[(i + 1) % hull.size()];
      if (detail::cross(a, hull[i], c) / (c - a).norm() <= ConvexPolygon::kCollinearTolerance) {
        hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return ConvexPolygon(std::move(hull));
}

struct Intersection {
  std::optional<ConvexPolygon> polygon;
  double area = 0;
};

// Overlap below this area (m^2) counts as no intersection.
inline constexpr double kMinOverlapArea = 1e-9;

// Sutherland-Hodgman clipping of `a` against each edge of convex `b`.
inline Intersection convex_intersection(const ConvexPolygon& a, const ConvexPolygon& b) {
  std::vector<Vec2> out = a.vertices();
  std::vector<Vec2> in;
  const auto& clip = b.vertices();
  for (std::size_t e = 0, m = clip.size(); e < m && !out.empty(); ++e) {
    const Vec2& c0 = clip[e];
    const Vec2& c1 = clip[(e + 1) % m];
    in.swap(out);
    out.clear();
    for (std::size_t i = 0, n = in.size(); i < n; ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % n];
      const double dp = detail::cross(c0, c1, p);
      const double dq = detail::cross(c0, c1, q);
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  Intersection result;
  if (out.size() < 3) return result;
  const double area = detail::signed_area(out);
  if (!(area > kMinOverlapArea)) return result;
  try {
    result.polygon = convex_hull(out);
    result.area = result.polygon->area();
  } catch (const DegenerateGeometry&) {
    return {};
  }
  if (!(result.area > kMinOverlapArea)) return {};
  return result;
}

inline std::pair<std::optional<ConvexPolygon>, double> convex_intersection_area(
    const ConvexPolygon& a, const ConvexPolygon& b) {
  auto r = convex_intersection(a, b);
  return {std::move(r.polygon), r.area};
}

}  // namespace uavmg
