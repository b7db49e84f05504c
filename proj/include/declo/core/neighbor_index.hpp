#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "declo/core/geometry.hpp"

namespace declo {

struct Neighbor {
  int index = -1;
  double distance = 0.0;
};

/// KD-tree over a fixed 3-D point set. Exact queries: results match a
/// brute-force scan, with distance ties broken by smaller point index.
class NeighborIndex {
 public:
  NeighborIndex() = default;

  explicit NeighborIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    for (const Vec3& p : points_)
      if (!p.allFinite()) throw std::invalid_argument("non-finite point");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!points_.empty()) build(0, static_cast<int>(points_.size()));
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// k nearest neighbors, ascending by distance (ties: smaller index first).
  std::vector<Neighbor> knn(const Vec3& query, int k) const {
    if (points_.empty()) throw std::runtime_error("empty index");
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    std::vector<Cand> heap;  // max-heap on (dist2, index)
    heap.reserve(static_cast<std::size_t>(k) + 1);
    search_knn(0, query, static_cast<std::size_t>(k), heap);

    std::sort(heap.begin(), heap.end());
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i)
      out[i] = Neighbor{heap[i].index, std::sqrt(heap[i].dist2)};
    return out;
  }

  /// All points within distance r (inclusive), sorted by point index.
  std::vector<int> radius(const Vec3& query, double r) const {
    if (r <= 0.0) throw std::invalid_argument("radius must be > 0");
    std::vector<int> out;
    if (!points_.empty()) search_radius(0, query, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Cand {
    double dist2;
    int index;
    bool operator<(const Cand& o) const {
      return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
    }
  };

  struct Node {
    Vec3 bb_min, bb_max;
    int begin = 0, end = 0;    // range into order_ (leaves only)
    int left = -1, right = -1;
  };

  static constexpr int kLeafSize = 12;

  // Builds the subtree over order_[begin, end); returns node id.
  int build(int begin, int end) {
    Node node;
    node.bb_min = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.bb_max = -node.bb_min;
    for (int i = begin; i < end; ++i) {
      const Vec3& p = points_[order_[i]];
      node.bb_min = node.bb_min.cwiseMin(p);
      node.bb_max = node.bb_max.cwiseMax(p);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }

    int axis = 0;
    (node.bb_max - node.bb_min).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       const double ca = points_[a][axis], cb = points_[b][axis];
                       return ca != cb ? ca < cb : a < b;
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  double bbox_dist2(const Node& n, const Vec3& q) const {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double lo = n.bb_min[a] - q[a];
      const double hi = q[a] - n.bb_max[a];
      const double d = std::max({lo, hi, 0.0});
      d2 += d * d;
    }
    return d2;
  }

  void search_knn(int id, const Vec3& q, std::size_t k,
                  std::vector<Cand>& heap) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        const Cand c{(points_[idx] - q).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double dl = bbox_dist2(nodes_[n.left], q);
    const double dr = bbox_dist2(nodes_[n.right], q);
    const int first = dl <= dr ? n.left : n.right;
    const int second = dl <= dr ? n.right : n.left;
    const double dsecond = std::max(dl, dr);
    // A tied box may still hold an equal-distance point with smaller index,
    // so only a strictly farther box can be pruned.
    if (heap.size() < k || std::min(dl, dr) <= heap.front().dist2)
      search_knn(first, q, k, heap);
    if (heap.size() < k || dsecond <= heap.front().dist2)
      search_knn(second, q, k, heap);
  }

  void search_radius(int id, const Vec3& q, double r2, std::vector<int>& out) const {
    const Node& n = nodes_[id];
    if (bbox_dist2(n, q) > r2) return;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
      }
      return;
    }
    search_radius(n.left, q, r2, out);
    search_radius(n.right, q, r2, out);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace declo
