// SPDX-License-Identifier: Apache-2.0

#include "olc/kd_tree.h"

#include <algorithm>

namespace olc {

KdTree::KdTree(const std::vector<Vec3d>& points) : points_(points) {
  if (points_.empty()) throw DomainError("KdTree: empty point set");
  order_.resize(points_.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(points_.size());
  root_ = build(0, points_.size(), 0);
}

int32_t KdTree::build(size_t begin, size_t end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](size_t a, size_t b) { return points_[a][axis] < points_[b][axis]; });
  const int32_t id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back({axis, order_[mid], -1, -1});
  const int32_t left = build(begin, mid, depth + 1);
  const int32_t right = build(mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::searchKnn(int32_t node, const Vec3d& q, size_t k,
                       std::vector<std::pair<double, size_t>>& heap) const {
  if (node < 0) return;
  const Node& nd = nodes_[node];
  const Vec3d& p = points_[nd.pointIndex];
  const double d2 = normSq(q - p);

  if (heap.size() < k) {
    heap.emplace_back(d2, nd.pointIndex);
    std::push_heap(heap.begin(), heap.end());
  } else if (d2 < heap.front().first
             || (d2 == heap.front().first && nd.pointIndex < heap.front().second)) {
    std::pop_heap(heap.begin(), heap.end());
    heap.back() = {d2, nd.pointIndex};
    std::push_heap(heap.begin(), heap.end());
  }

  const double diff = q[nd.axis] - p[nd.axis];
  const int32_t near = diff < 0 ? nd.left : nd.right;
  const int32_t far = diff < 0 ? nd.right : nd.left;
  searchKnn(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().first) searchKnn(far, q, k, heap);
}

std::pair<size_t, double> KdTree::nearest(const Vec3d& query) const {
  std::vector<std::pair<double, size_t>> heap;
  heap.reserve(1);
  searchKnn(root_, query, 1, heap);
  return {heap.front().second, heap.front().first};
}

std::vector<size_t> KdTree::knn(const Vec3d& query, size_t k) const {
  k = std::min(k, points_.size());
  std::vector<std::pair<double, size_t>> heap;
  heap.reserve(k);
  searchKnn(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<size_t> out;
  out.reserve(heap.size());
  for (const auto& [d, i] : heap) out.push_back(i);
  return out;
}

}  // namespace olc
