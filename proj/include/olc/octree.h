// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_OCTREE_H
#define OLC_OCTREE_H

#include <cstdint>
#include <vector>

#include "olc/point_cloud.h"

namespace olc {

// Child bit convention: bit k of the occupancy byte is the child at octant
// k = x_bit + 2*y_bit + 4*z_bit. Decoders depend on this; it is part of the
// bitstream format.
struct OctreeNode {
  uint8_t occupancy = 0;  // 1..255 for an existing node
  int32_t level = 0;
  uint8_t octant = 0;      // index within parent; 0 for the root
  Vec3i cellOrigin{0, 0, 0};  // cell coordinate at this node's level
  int32_t parentIndex = -1;   // index into the previous level, -1 for root
};

struct Octree {
  int depth = 1;
  std::vector<std::vector<OctreeNode>> levels;  // Morton-ordered within each level

  // carried from the quantized cloud so reconstruct() is self-contained
  double qs = 1.0;
  Vec3d origin{0, 0, 0};
  uint64_t sourceCount = 0;

  size_t nodeCount() const;
  const std::vector<OctreeNode>& leafLevel() const { return levels.back(); }

  // Level-major occupancy byte sequence; the canonical serialized form.
  std::vector<uint8_t> symbolSequence() const;
};

Octree buildOctree(const QuantizedCloud& qc);
QuantizedCloud reconstruct(const Octree& tree);

struct LeafSplit {
  std::vector<OctreeNode> nonLeaf;  // levels 0..depth-2 flattened in level order
  std::vector<OctreeNode> leaf;     // level depth-1
};
LeafSplit splitLeafNonLeaf(const Octree& tree);

// Parity split on the cell coordinate: even (x+y+z) goes to A. Both outputs
// are index lists into the input, Morton order preserved.
struct CheckerboardGroups {
  std::vector<uint32_t> groupA;
  std::vector<uint32_t> groupB;
};
CheckerboardGroups checkerboardPartition(const std::vector<OctreeNode>& levelNodes);

}  // namespace olc

#endif
