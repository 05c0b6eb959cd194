// SPDX-License-Identifier: Apache-2.0

#include "olc/octree.h"

#include <algorithm>

namespace olc {

size_t Octree::nodeCount() const {
  size_t n = 0;
  for (const auto& lv : levels) n += lv.size();
  return n;
}

std::vector<uint8_t> Octree::symbolSequence() const {
  std::vector<uint8_t> seq;
  seq.reserve(nodeCount());
  for (const auto& lv : levels)
    for (const auto& node : lv) seq.push_back(node.occupancy);
  return seq;
}

Octree buildOctree(const QuantizedCloud& qc) {
  if (qc.coords.empty()) throw DomainError("buildOctree: empty cloud");
  if (qc.depth < 1 || qc.depth > 21) throw DomainError("buildOctree: depth out of range");

  const int depth = qc.depth;
  std::vector<uint64_t> codes;
  codes.reserve(qc.coords.size());
  for (const auto& c : qc.coords) {
    if (c.x < 0 || c.y < 0 || c.z < 0 || std::max({c.x, c.y, c.z}) >= (int64_t{1} << depth))
      throw DomainError("buildOctree: coordinate outside [0, 2^depth)");
    codes.push_back(mortonEncode(c));
  }
  std::sort(codes.begin(), codes.end());
  if (std::adjacent_find(codes.begin(), codes.end()) != codes.end())
    throw DomainError("buildOctree: duplicate coordinates");

  Octree tree;
  tree.depth = depth;
  tree.qs = qc.qs;
  tree.origin = qc.origin;
  tree.sourceCount = qc.sourceCount;
  tree.levels.resize(depth);

  // One pass per level over the sorted Morton codes. Cells at level l are the
  // distinct prefixes (code >> 3*(depth-l)); sorted codes keep each cell's
  // points contiguous, so nodes come out in Morton order.
  std::vector<int32_t> prevParent;  // parent index per level-(l-1) node, reused
  for (int l = 0; l < depth; ++l) {
    const int childShift = 3 * (depth - l - 1);
    auto& nodes = tree.levels[l];
    size_t i = 0;
    int32_t parentScan = -1;   // index into levels[l-1]
    uint64_t parentKey = ~0ull;
    while (i < codes.size()) {
      const uint64_t key = codes[i] >> (childShift + 3);
      OctreeNode node;
      node.level = l;
      node.cellOrigin = mortonDecode(key);
      node.octant = l == 0 ? 0 : static_cast<uint8_t>(key & 7);
      if (l > 0) {
        // parents were emitted in the same Morton order one level up
        if ((key >> 3) != parentKey) {
          parentKey = key >> 3;
          ++parentScan;
          while (mortonEncode(tree.levels[l - 1][parentScan].cellOrigin) != parentKey) ++parentScan;
        }
        node.parentIndex = parentScan;
      }
      while (i < codes.size() && (codes[i] >> (childShift + 3)) == key) {
        node.occupancy |= static_cast<uint8_t>(1u << ((codes[i] >> childShift) & 7));
        // advance to the next distinct child cell of this node
        const uint64_t childKey = codes[i] >> childShift;
        while (i < codes.size() && (codes[i] >> childShift) == childKey) ++i;
      }
      nodes.push_back(node);
    }
  }
  return tree;
}

QuantizedCloud reconstruct(const Octree& tree) {
  QuantizedCloud qc;
  qc.depth = tree.depth;
  qc.qs = tree.qs;
  qc.origin = tree.origin;
  qc.sourceCount = tree.sourceCount;

  for (const auto& leaf : tree.leafLevel()) {
    for (int k = 0; k < 8; ++k) {
      if (leaf.occupancy & (1u << k)) {
        qc.coords.push_back({leaf.cellOrigin.x * 2 + (k & 1), leaf.cellOrigin.y * 2 + ((k >> 1) & 1),
                             leaf.cellOrigin.z * 2 + ((k >> 2) & 1)});
      }
    }
  }
  return qc;
}

LeafSplit splitLeafNonLeaf(const Octree& tree) {
  LeafSplit split;
  for (int l = 0; l + 1 < tree.depth; ++l)
    split.nonLeaf.insert(split.nonLeaf.end(), tree.levels[l].begin(), tree.levels[l].end());
  split.leaf = tree.leafLevel();
  return split;
}

CheckerboardGroups checkerboardPartition(const std::vector<OctreeNode>& levelNodes) {
  CheckerboardGroups g;
  for (uint32_t i = 0; i < levelNodes.size(); ++i) {
    const Vec3i& c = levelNodes[i].cellOrigin;
    if (((c.x + c.y + c.z) & 1) == 0) g.groupA.push_back(i);
    else g.groupB.push_back(i);
  }
  return g;
}

}  // namespace olc
