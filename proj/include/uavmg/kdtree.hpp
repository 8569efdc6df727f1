#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "uavmg/errors.hpp"
#include "uavmg/geo/rotation.hpp"

namespace uavmg {

// Static 2-D kd-tree over a point set. Queries return neighbors in
// ascending distance with ties broken by point index.
class KdTree2 {
 public:
  struct Neighbor {
    std::size_t index;
    double distance;
  };

  KdTree2() = default;

  explicit KdTree2(std::span<const Vec2> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      root_ = build(0, points_.size());
    }
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec2& point(std::size_t i) const { return points_[i]; }

  // Best-first traversal yielding points one at a time in ascending
  // (distance, index) order. Cheap to stop early.
  class Cursor {
   public:
    Cursor(const KdTree2& tree, const Vec2& query) : tree_(&tree), query_(query) {
      if (!tree.nodes_.empty()) heap_.push({tree.box_distance2(tree.root_, query), kNode, tree.root_});
    }

    std::optional<Neighbor> next() {
      while (!heap_.empty()) {
        const Item top = heap_.top();
        heap_.pop();
        if (top.kind == kPoint) return Neighbor{top.id, std::sqrt(top.dist2)};
        const Node& n = tree_->nodes_[top.id];
        if (n.leaf) {
          for (std::size_t k = n.begin; k < n.end; ++k) {
            const std::size_t idx = tree_->order_[k];
            heap_.push({(tree_->points_[idx] - query_).squaredNorm(), kPoint, idx});
          }
        } else {
          heap_.push({tree_->box_distance2(n.left, query_), kNode, n.left});
          heap_.push({tree_->box_distance2(n.right, query_), kNode, n.right});
        }
      }
      return std::nullopt;
    }

   private:
    // Nodes sort before points at equal distance so a tied point with a
    // lower index is never hidden inside an unexpanded node.
    enum Kind : std::uint8_t { kNode = 0, kPoint = 1 };
    struct Item {
      double dist2;
      Kind kind;
      std::size_t id;
      bool operator>(const Item& o) const {
        if (dist2 != o.dist2) return dist2 > o.dist2;
        if (kind != o.kind) return kind > o.kind;
        return id > o.id;
      }
    };

    const KdTree2* tree_;
    Vec2 query_;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap_;
  };

  Cursor cursor(const Vec2& query) const { return Cursor(*this, query); }

  // The k nearest points to point `query`, excluding the query itself.
  std::vector<Neighbor> knn(std::size_t query, std::size_t k) const {
    if (empty()) throw InvalidState("spatial index is empty");
    if (query >= size()) throw InvalidArgument("query index out of range");
    std::vector<Neighbor> out;
    out.reserve(std::min(k, size()));
    Cursor c = cursor(points_[query]);
    while (out.size() < k) {
      auto nb = c.next();
      if (!nb) break;
      if (nb->index != query) out.push_back(*nb);
    }
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    Vec2 lo, hi;
    std::size_t begin = 0, end = 0;
    std::size_t left = 0, right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = node.hi = points_[order_[begin]];
    for (std::size_t k = begin; k < end; ++k) {
      node.lo = node.lo.cwiseMin(points_[order_[k]]);
      node.hi = node.hi.cwiseMax(points_[order_[k]]);
    }
    const std::size_t id = nodes_.size();
    nodes_.push_back(node);
    if (end - begin > kLeafSize) {
      const int axis = (node.hi - node.lo).x() >= (node.hi - node.lo).y() ? 0 : 1;
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                       order_.begin() + static_cast<std::ptrdiff_t>(mid),
                       order_.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t a, std::size_t b) {
                         return points_[a][axis] < points_[b][axis];
                       });
      const std::size_t l = build(begin, mid);
      const std::size_t r = build(mid, end);
      nodes_[id].leaf = false;
      nodes_[id].left = l;
      nodes_[id].right = r;
    }
    return id;
  }

  double box_distance2(std::size_t node, const Vec2& q) const {
    const Node& n = nodes_[node];
    const Vec2 d = (n.lo - q).cwiseMax(q - n.hi).cwiseMax(Vec2::Zero());
    return d.squaredNorm();
  }

  std::vector<Vec2> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

}  // namespace uavmg
