// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <set>

#include "olc/octree.h"
#include "synthetic.h"

using namespace olc;

namespace {

std::set<std::array<int32_t, 3>> coordSet(const QuantizedCloud& qc) {
  std::set<std::array<int32_t, 3>> s;
  for (const auto& c : qc.coords) s.insert({c.x, c.y, c.z});
  return s;
}

QuantizedCloud cloudFromCoords(std::vector<Vec3i> coords, int depth) {
  QuantizedCloud qc;
  qc.coords = std::move(coords);
  qc.depth = depth;
  qc.sourceCount = qc.coords.size();
  return qc;
}

}  // namespace

TEST_CASE("single point at the origin sets child bit 0") {
  Octree tree = buildOctree(cloudFromCoords({{0, 0, 0}}, 1));
  REQUIRE(tree.levels.size() == 1);
  REQUIRE(tree.levels[0].size() == 1);
  CHECK(tree.levels[0][0].occupancy == 0b00000001);
}

TEST_CASE("eight corners of the unit cube fill the root") {
  std::vector<Vec3i> corners;
  for (int k = 0; k < 8; ++k) corners.push_back({k & 1, (k >> 1) & 1, (k >> 2) & 1});
  Octree tree = buildOctree(cloudFromCoords(corners, 1));
  CHECK(tree.levels[0][0].occupancy == 255);
}

TEST_CASE("child octant follows x + 2y + 4z") {
  Octree tree = buildOctree(cloudFromCoords({{0, 1, 0}}, 1));
  CHECK(tree.levels[0][0].occupancy == (1u << 2));
  tree = buildOctree(cloudFromCoords({{0, 0, 1}}, 1));
  CHECK(tree.levels[0][0].occupancy == (1u << 4));
}

TEST_CASE("reconstruct(buildOctree(qc)) is the identity on coordinate sets") {
  for (int depth = 1; depth <= 8; ++depth) {
    QuantizedCloud qc = testdata::randomQuantized(100, depth, 1000 + depth);
    Octree tree = buildOctree(qc);
    QuantizedCloud back = reconstruct(tree);
    CHECK(coordSet(back) == coordSet(qc));
    CHECK(back.depth == qc.depth);
    CHECK(back.sourceCount == qc.sourceCount);
  }
}

TEST_CASE("reconstruct emits one coordinate per set leaf bit") {
  QuantizedCloud qc = testdata::randomQuantized(300, 5, 99);
  Octree tree = buildOctree(qc);
  size_t popcount = 0;
  for (const auto& leaf : tree.leafLevel()) popcount += std::popcount(leaf.occupancy);
  CHECK(reconstruct(tree).coords.size() == popcount);
}

TEST_CASE("level sizes follow the occupancy popcounts") {
  QuantizedCloud qc = testdata::randomQuantized(500, 6, 7);
  Octree tree = buildOctree(qc);
  for (int l = 0; l + 1 < tree.depth; ++l) {
    size_t expect = 0;
    for (const auto& n : tree.levels[l]) expect += std::popcount(n.occupancy);
    CHECK(tree.levels[l + 1].size() == expect);
  }
}

TEST_CASE("levels are Morton ordered and parent links are consistent") {
  QuantizedCloud qc = testdata::randomQuantized(400, 6, 21);
  Octree tree = buildOctree(qc);
  for (int l = 0; l < tree.depth; ++l) {
    const auto& nodes = tree.levels[l];
    for (size_t i = 1; i < nodes.size(); ++i)
      CHECK(mortonEncode(nodes[i - 1].cellOrigin) < mortonEncode(nodes[i].cellOrigin));
    if (l == 0) continue;
    for (const auto& n : nodes) {
      REQUIRE(n.parentIndex >= 0);
      const auto& p = tree.levels[l - 1][n.parentIndex];
      CHECK(p.cellOrigin == Vec3i{n.cellOrigin.x / 2, n.cellOrigin.y / 2, n.cellOrigin.z / 2});
      CHECK(((p.occupancy >> n.octant) & 1) == 1);
    }
  }
}

TEST_CASE("building twice gives byte-identical symbol sequences") {
  QuantizedCloud qc = testdata::randomQuantized(700, 7, 5);
  Octree a = buildOctree(qc);
  // rebuild from a shuffled copy of the same coordinates
  QuantizedCloud shuffled = qc;
  Rng rng(3);
  for (size_t i = shuffled.coords.size(); i > 1; --i)
    std::swap(shuffled.coords[i - 1], shuffled.coords[rng.nextBelow(i)]);
  Octree b = buildOctree(shuffled);
  CHECK(a.symbolSequence() == b.symbolSequence());
}

TEST_CASE("rebuilding from a reconstruction is canonical") {
  QuantizedCloud qc = testdata::randomQuantized(250, 5, 17);
  Octree tree = buildOctree(qc);
  Octree again = buildOctree(reconstruct(tree));
  CHECK(tree.symbolSequence() == again.symbolSequence());
}

TEST_CASE("buildOctree rejects bad input") {
  CHECK_THROWS_AS(buildOctree(cloudFromCoords({}, 3)), DomainError);
  CHECK_THROWS_AS(buildOctree(cloudFromCoords({{8, 0, 0}}, 3)), DomainError);
}

TEST_CASE("splitLeafNonLeaf boundaries") {
  Octree depth1 = buildOctree(cloudFromCoords({{0, 0, 0}, {1, 1, 1}}, 1));
  LeafSplit s1 = splitLeafNonLeaf(depth1);
  CHECK(s1.nonLeaf.empty());
  CHECK(s1.leaf.size() == 1);

  std::vector<Vec3i> corners;
  for (int k = 0; k < 8; ++k) corners.push_back({(k & 1) * 3, ((k >> 1) & 1) * 3, ((k >> 2) & 1) * 3});
  Octree depth2 = buildOctree(cloudFromCoords(corners, 2));
  LeafSplit s2 = splitLeafNonLeaf(depth2);
  CHECK(s2.nonLeaf.size() == 1);
  CHECK(s2.leaf.size() == 8);
}

TEST_CASE("dense surfaces at depth 9 are mostly leaf nodes") {
  PointCloud pc = testdata::sphereShell(200.0, {256, 256, 256});
  QuantizedCloud qc = quantize(pc, 1.0);
  REQUIRE(qc.depth == 9);
  Octree tree = buildOctree(qc);
  LeafSplit split = splitLeafNonLeaf(tree);
  const double leafFraction =
    double(split.leaf.size()) / double(split.leaf.size() + split.nonLeaf.size());
  CHECK(leafFraction > 0.5);
}

TEST_CASE("checkerboard splits the 8 children of one parent evenly") {
  std::vector<Vec3i> corners;
  for (int k = 0; k < 8; ++k) corners.push_back({k & 1, (k >> 1) & 1, (k >> 2) & 1});
  Octree tree = buildOctree(cloudFromCoords(corners, 1));
  CheckerboardGroups g = checkerboardPartition(tree.levels[0]);
  // a single root: parity of (0,0,0) is even
  CHECK(g.groupA.size() == 1);
  CHECK(g.groupB.empty());

  // depth-2 cube corners: leaf level has 8 single-voxel cells
  std::vector<Vec3i> spread;
  for (int k = 0; k < 8; ++k)
    spread.push_back({(k & 1) * 2, ((k >> 1) & 1) * 2, ((k >> 2) & 1) * 2});
  Octree t2 = buildOctree(cloudFromCoords(spread, 2));
  REQUIRE(t2.levels[1].size() == 8);
  CheckerboardGroups g2 = checkerboardPartition(t2.levels[1]);
  CHECK(g2.groupA.size() == 4);
  CHECK(g2.groupB.size() == 4);
}

TEST_CASE("checkerboard partition is a bijection that keeps order") {
  QuantizedCloud qc = testdata::randomQuantized(1000, 7, 55);
  Octree tree = buildOctree(qc);
  const auto& level = tree.levels[tree.depth - 1];
  CheckerboardGroups g = checkerboardPartition(level);
  CHECK(g.groupA.size() + g.groupB.size() == level.size());

  std::vector<bool> seen(level.size(), false);
  for (uint32_t i : g.groupA) {
    const Vec3i& c = level[i].cellOrigin;
    CHECK((c.x + c.y + c.z) % 2 == 0);
    seen[i] = true;
  }
  for (uint32_t i : g.groupB) {
    const Vec3i& c = level[i].cellOrigin;
    CHECK((c.x + c.y + c.z) % 2 != 0);
    CHECK(!seen[i]);
    seen[i] = true;
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  CHECK(std::is_sorted(g.groupA.begin(), g.groupA.end()));
  CHECK(std::is_sorted(g.groupB.begin(), g.groupB.end()));
}
