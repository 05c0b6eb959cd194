// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "olc/leaf_codec.h"
#include "olc/trainer.h"
#include "synthetic.h"

using namespace olc;

namespace {

ModelConfig tinyConfig() {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ancestorLevels = 2;
  cfg.coderWindow = 128;
  cfg.predictorWindow = 128;
  return cfg;
}

std::vector<std::vector<OctreeNode>> decodeSide(const Octree& tree) {
  auto levels = tree.levels;
  for (auto& n : levels.back()) n.occupancy = 0;  // structure only, occupancies unknown
  return levels;
}

std::vector<uint8_t> trueLeafOcc(const Octree& tree) {
  std::vector<uint8_t> occ;
  for (const auto& n : tree.leafLevel()) occ.push_back(n.occupancy);
  return occ;
}

}  // namespace

TEST_CASE("s=8 reproduces every leaf exactly (baseline and learned)") {
  Octree tree = buildOctree(testdata::randomQuantized(400, 5, 61));
  LeafCodingPlan plan;
  plan.steps = 8;
  ModelWeights model(tinyConfig(), 17);

  for (const ModelWeights* m : {static_cast<const ModelWeights*>(nullptr), static_cast<const ModelWeights*>(&model)}) {
    Bitpayload payload = encodeLeafLossless(tree.levels, plan, m);
    auto out = decodeLeaf(payload, decodeSide(tree), plan, m);
    CHECK(out == trueLeafOcc(tree));
  }
}

TEST_CASE("s=0 emits an empty payload") {
  Octree tree = buildOctree(testdata::randomQuantized(100, 4, 62));
  LeafCodingPlan plan;
  plan.steps = 0;
  Bitpayload payload = encodeLeafLossless(tree.levels, plan, nullptr);
  CHECK(payload.bytes.empty());
  CHECK(payload.symbolCount == 0);
}

TEST_CASE("uniform model costs about one bit per coded leaf bit") {
  Octree tree = buildOctree(testdata::randomQuantized(600, 5, 63));
  const size_t leaves = tree.leafLevel().size();
  LeafCodingPlan plan;
  plan.steps = 3;
  ModelWeights model(tinyConfig(), 3);  // zero-init leafbit head: exactly uniform

  Bitpayload payload = encodeLeafLossless(tree.levels, plan, &model);
  const double bits = static_cast<double>(payload.bytes.size()) * 8.0;
  const double expected = 3.0 * static_cast<double>(leaves);
  CHECK(bits >= expected - 8.0);
  CHECK(bits <= expected + 0.01 * expected + 64.0);
}

TEST_CASE("s=0 with a uniform predictor falls back to the forced bit") {
  Octree tree = buildOctree(testdata::randomQuantized(150, 4, 64));
  LeafCodingPlan plan;
  plan.steps = 0;
  Bitpayload empty;
  auto out = decodeLeaf(empty, decodeSide(tree), plan, nullptr);
  for (uint8_t occ : out) CHECK(occ == 0b00000001);  // ties to 0, then bit 0 forced
}

TEST_CASE("no decoded leaf is ever empty") {
  Octree tree = buildOctree(testdata::randomQuantized(300, 5, 65));
  ModelWeights model(tinyConfig(), 66);
  for (int s : {0, 1, 3, 5, 8}) {
    LeafCodingPlan plan;
    plan.steps = s;
    Bitpayload payload = encodeLeafLossless(tree.levels, plan, &model);
    auto out = decodeLeaf(payload, decodeSide(tree), plan, &model);
    for (uint8_t occ : out) CHECK(occ != 0);
  }
}

TEST_CASE("transmitted planes are exact for every s") {
  Octree tree = buildOctree(testdata::randomQuantized(350, 5, 67));
  ModelWeights model(tinyConfig(), 68);
  auto truth = trueLeafOcc(tree);
  for (int s = 1; s <= 8; ++s) {
    LeafCodingPlan plan;
    plan.steps = s;
    const uint8_t mask = plan.partialMask(s);
    Bitpayload payload = encodeLeafLossless(tree.levels, plan, &model);
    auto out = decodeLeaf(payload, decodeSide(tree), plan, &model);
    for (size_t i = 0; i < truth.size(); ++i) CHECK((out[i] & mask) == (truth[i] & mask));
  }
}

TEST_CASE("payload ignores the bits of the lossy phase") {
  Octree a = buildOctree(testdata::randomQuantized(250, 5, 69));
  Octree b = a;
  Rng rng(70);
  for (auto& n : b.levels.back()) {
    const uint8_t low = n.occupancy & 0x07;  // planes 0..2 stay put
    uint8_t high = static_cast<uint8_t>(rng.nextBelow(32)) << 3;
    if ((low | high) == 0) high = 0x08;
    n.occupancy = low | high;
  }

  LeafCodingPlan plan;
  plan.steps = 3;
  ModelWeights model(tinyConfig(), 71);
  Bitpayload pa = encodeLeafLossless(a.levels, plan, &model);
  Bitpayload pb = encodeLeafLossless(b.levels, plan, &model);
  CHECK(pa.bytes == pb.bytes);

  Bitpayload ba = encodeLeafLossless(a.levels, plan, nullptr);
  Bitpayload bb = encodeLeafLossless(b.levels, plan, nullptr);
  CHECK(ba.bytes == bb.bytes);
}

TEST_CASE("a permuted bit order roundtrips too") {
  Octree tree = buildOctree(testdata::randomQuantized(200, 4, 72));
  LeafCodingPlan plan;
  plan.steps = 8;
  plan.bitOrder = {7, 3, 5, 1, 6, 0, 2, 4};
  Bitpayload payload = encodeLeafLossless(tree.levels, plan, nullptr);
  auto out = decodeLeaf(payload, decodeSide(tree), plan, nullptr);
  CHECK(out == trueLeafOcc(tree));
}

TEST_CASE("leaf coding plan validation") {
  LeafCodingPlan bad;
  bad.steps = 9;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.steps = 4;
  bad.bitOrder = {0, 0, 1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("rdSweep rows are sorted with lossless at the top") {
  PointCloud pc = testdata::sphereShell(10.0, {16, 16, 16});
  std::vector<int> sValues = {8, 0, 4};
  auto rows = rdSweep(pc, 5, nullptr, false, sValues);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].steps == 0);
  CHECK(rows[2].steps == 8);
  CHECK(std::isinf(rows[2].d1Psnr));
  CHECK(rows[2].chamfer == doctest::Approx(0.0));
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].bpp >= rows[i - 1].bpp);
}

TEST_CASE("a trained toy predictor beats coin flipping at s=4") {
  // structured data: spherical shells have strongly correlated sibling bits
  std::vector<Octree> trainSet;
  for (int r = 0; r < 3; ++r) {
    PointCloud pc = testdata::sphereShell(11.0 + 2 * r, {16, 16, 16});
    trainSet.push_back(buildOctree(quantize(pc, 1.0)));
  }
  ModelConfig cfg = tinyConfig();
  cfg.dim = 16;
  cfg.ancestorLevels = 3;
  ModelWeights w(cfg, 73);
  TrainHyper hyper;
  hyper.lr = 5e-3;
  hyper.epochs = 4;
  hyper.window = 256;
  hyper.seed = 4;
  ModelWeights trained = train(std::move(w), trainSet, Head::LeafPredict, hyper, nullptr);

  PointCloud test = testdata::sphereShell(14.0, {16, 16, 16});
  Octree tree = buildOctree(quantize(test, 1.0));
  auto truth = trueLeafOcc(tree);

  LeafCodingPlan plan;
  plan.steps = 4;
  Bitpayload payload = encodeLeafLossless(tree.levels, plan, &trained);
  auto out = decodeLeaf(payload, decodeSide(tree), plan, &trained);

  size_t correct = 0, totalBits = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    CHECK((out[i] & 0x0f) == (truth[i] & 0x0f));  // transmitted planes exact
    for (int plane = 4; plane < 8; ++plane) {
      correct += ((out[i] >> plane) & 1) == ((truth[i] >> plane) & 1);
      ++totalBits;
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(totalBits);
  CHECK(accuracy > 0.5);
}
