#pragma once

// Exact nearest-neighbor index over a static point set. Distances are
// compared as (squared distance, original index) pairs, so ties resolve to
// the lowest index exactly as a brute-force scan would.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ponq/vec.hpp"

namespace ponq {

struct NearestHit {
  std::uint32_t index = UINT32_MAX;
  double squared_distance = std::numeric_limits<double>::infinity();
};

constexpr bool closer(double d2, std::uint32_t i, const NearestHit& best) {
  return d2 < best.squared_distance || (d2 == best.squared_distance && i < best.index);
}

/// Reference O(n) scan with the same tie-breaking as KdTree.
inline NearestHit brute_force_nearest(std::span<const Vec3> points, const Vec3& q) {
  NearestHit best;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const double d2 = squared_distance(points[i], q);
    if (closer(d2, i, best)) best = {i, d2};
  }
  return best;
}

class KdTree {
 public:
  KdTree() = default;

  explicit KdTree(std::span<const Vec3> points, std::uint32_t leaf_size = 8)
      : leaf_size_(std::max<std::uint32_t>(leaf_size, 1)) {
    const auto n = static_cast<std::uint32_t>(points.size());
    index_.resize(n);
    std::iota(index_.begin(), index_.end(), 0u);
    points_.assign(points.begin(), points.end());
    if (n == 0) return;
    nodes_.reserve(2 * (n / leaf_size_ + 1));
    build(0, n);
    ordered_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) ordered_[i] = points_[index_[i]];
  }

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  const Vec3& point(std::uint32_t original_index) const { return points_[original_index]; }

  NearestHit nearest(const Vec3& q) const { return search(q, NearestHit{}); }

  /// Same result as nearest(q); `hint` seeds the search bound.
  NearestHit nearest(const Vec3& q, std::uint32_t hint) const {
    if (hint >= points_.size()) return nearest(q);
    return search(q, NearestHit{hint, squared_distance(points_[hint], q)});
  }

  /// Nearest point other than the one with index `skip`.
  NearestHit nearest_excluding(const Vec3& q, std::uint32_t skip) const {
    return search(q, NearestHit{}, skip);
  }

 private:
  struct Node {
    Vec3 lo, hi;
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;  // 0 for leaves (root is never a child)
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Vec3 lo = points_[index_[begin]], hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = cwise_min(lo, points_[index_[i]]);
      hi = cwise_max(hi, points_[index_[i]]);
    }
    std::uint32_t left = 0, right = 0;
    if (end - begin > leaf_size_) {
      const Vec3 ext = hi - lo;
      const int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);
      const std::uint32_t mid = begin + (end - begin) / 2;
      std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = points_[a][axis], cb = points_[b][axis];
                         return ca < cb || (ca == cb && a < b);
                       });
      left = build(begin, mid);
      right = build(mid, end);
    }
    nodes_[id] = {lo, hi, begin, end, left, right};
    return id;
  }

  static double box_distance2(const Node& n, const Vec3& q) {
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double v = q[k] < n.lo[k] ? n.lo[k] - q[k] : (q[k] > n.hi[k] ? q[k] - n.hi[k] : 0.0);
      d2 += v * v;
    }
    return d2;
  }

  NearestHit search(const Vec3& q, NearestHit best, std::uint32_t skip = UINT32_MAX) const {
    if (nodes_.empty()) return best;
    std::uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (box_distance2(node, q) > best.squared_distance) continue;
      if (node.left == 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
          if (index_[i] == skip) continue;
          const double d2 = squared_distance(ordered_[i], q);
          if (closer(d2, index_[i], best)) best = {index_[i], d2};
        }
        continue;
      }
      const double dl = box_distance2(nodes_[node.left], q);
      const double dr = box_distance2(nodes_[node.right], q);
      // Push the farther child first so the nearer one is explored next.
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
    return best;
  }

  std::uint32_t leaf_size_ = 8;
  std::vector<Vec3> points_;
  std::vector<Vec3> ordered_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace ponq
