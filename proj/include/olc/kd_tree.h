// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_KD_TREE_H
#define OLC_KD_TREE_H

#include <vector>

#include "olc/common.h"

namespace olc {

// Exact nearest-neighbor search; metric results must not depend on any
// approximation or traversal order.
class KdTree {
public:
  explicit KdTree(const std::vector<Vec3d>& points);

  // index of the nearest point and its squared distance
  std::pair<size_t, double> nearest(const Vec3d& query) const;

  // k nearest indices, closest first
  std::vector<size_t> knn(const Vec3d& query, size_t k) const;

  size_t size() const { return points_.size(); }
  const Vec3d& point(size_t i) const { return points_[i]; }

private:
  struct Node {
    int axis = 0;
    size_t pointIndex = 0;
    int32_t left = -1;
    int32_t right = -1;
  };

  int32_t build(size_t begin, size_t end, int depth);
  void searchKnn(int32_t node, const Vec3d& q, size_t k,
                 std::vector<std::pair<double, size_t>>& heap) const;

  std::vector<Vec3d> points_;
  std::vector<size_t> order_;
  std::vector<Node> nodes_;
  int32_t root_ = -1;
};

}  // namespace olc

#endif
