// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "olc/rate_control.h"
#include "synthetic.h"

using namespace olc;

namespace {

std::vector<PointCloud> lidarSet(int clouds, int rings, int perRing, uint64_t seed) {
  std::vector<PointCloud> out;
  for (int i = 0; i < clouds; ++i) out.push_back(testdata::lidarRings(rings, perRing, seed + i));
  return out;
}

}  // namespace

TEST_CASE("qsForTarget endpoints and midpoint are exact") {
  RateAnchor lo{8, 2.0 / 255.0, 1.0};
  RateAnchor hi{9, 2.0 / 511.0, 3.0};
  CHECK(qsForTarget(lo.bpp, lo, hi) == lo.qs);
  CHECK(qsForTarget(hi.bpp, lo, hi) == hi.qs);
  CHECK(qsForTarget(2.0, lo, hi) == doctest::Approx(0.5 * (lo.qs + hi.qs)).epsilon(1e-15));
}

TEST_CASE("qsForTarget is exactly affine") {
  RateAnchor lo{7, 0.02, 0.8};
  RateAnchor hi{8, 0.008, 2.2};
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = rng.nextDouble();
    const double target = alpha * lo.bpp + (1.0 - alpha) * hi.bpp;
    const double expect = alpha * lo.qs + (1.0 - alpha) * hi.qs;
    CHECK(std::abs(qsForTarget(target, lo, hi) - expect) < 1e-12);
  }
}

TEST_CASE("qsForTarget rejects out-of-range and degenerate anchors") {
  RateAnchor lo{8, 0.02, 1.0};
  RateAnchor hi{9, 0.01, 3.0};
  CHECK_THROWS_AS(qsForTarget(0.5, lo, hi), DomainError);
  CHECK_THROWS_AS(qsForTarget(3.5, lo, hi), DomainError);
  RateAnchor flat{9, 0.01, 1.0};
  CHECK_THROWS_AS(qsForTarget(1.0, lo, flat), DomainError);
}

TEST_CASE("anchor table validation and bracketing") {
  RateAnchorTable t;
  t.anchors = {{7, 0.03, 1.0}, {8, 0.015, 2.0}, {9, 0.0075, 4.0}};
  t.validate();
  auto [lo, hi] = t.bracket(1.5);
  CHECK(lo->depth == 7);
  CHECK(hi->depth == 8);
  auto [lo2, hi2] = t.bracket(3.9);
  CHECK(lo2->depth == 8);
  CHECK_THROWS_AS(t.bracket(0.5), DomainError);
  CHECK_THROWS_AS(t.bracket(4.5), DomainError);

  RateAnchorTable gap;
  gap.anchors = {{7, 0.03, 1.0}, {9, 0.0075, 4.0}};  // non-contiguous depths
  CHECK_THROWS_AS(gap.validate(), DomainError);

  RateAnchorTable nonmono;
  nonmono.anchors = {{7, 0.03, 2.0}, {8, 0.015, 1.0}};
  CHECK_THROWS_AS(nonmono.validate(), DomainError);
}

TEST_CASE("calibrate produces increasing bpp anchors") {
  auto dataset = lidarSet(2, 10, 300, 500);
  RateAnchorTable table = calibrate(dataset, nullptr, 6, 7);
  REQUIRE(table.anchors.size() == 2);
  CHECK(table.anchors[0].depth == 6);
  CHECK(table.anchors[1].bpp > table.anchors[0].bpp);
  CHECK(table.anchors[1].qs < table.anchors[0].qs);
}

TEST_CASE("calibration mean is invariant to duplicated clouds") {
  auto one = lidarSet(1, 8, 250, 600);
  std::vector<PointCloud> two = {one[0], one[0]};
  RateAnchorTable ta = calibrate(one, nullptr, 6, 7);
  RateAnchorTable tb = calibrate(two, nullptr, 6, 7);
  for (size_t i = 0; i < ta.anchors.size(); ++i)
    CHECK(ta.anchors[i].bpp == doctest::Approx(tb.anchors[i].bpp).epsilon(1e-12));
}

TEST_CASE("calibrate rejects an empty dataset") {
  CHECK_THROWS_AS(calibrate({}, nullptr, 6, 7), DomainError);
  auto dataset = lidarSet(1, 6, 100, 700);
  CHECK_THROWS_AS(calibrate(dataset, nullptr, 6, 6), DomainError);
}

TEST_CASE("rcEncode hits the formula and leaves the model alone") {
  auto dataset = lidarSet(3, 10, 300, 800);
  RateAnchorTable table = calibrate(dataset, nullptr, 6, 8);

  const double target = 0.5 * (table.anchors[0].bpp + table.anchors[1].bpp);
  RcResult res = rcEncode(dataset[0], target, table, nullptr);
  CHECK(res.qs > table.anchors[1].qs);
  CHECK(res.qs < table.anchors[0].qs);
  CHECK(res.bitError == doctest::Approx(std::abs(target - res.achievedBpp) / target));
  CHECK(decodeQuantized(res.stream).coords.size() > 0);

  // exact anchor hits return the anchor qs directly
  RcResult hit = rcEncode(dataset[0], table.anchors[1].bpp, table, nullptr);
  CHECK(hit.qs == table.anchors[1].qs);
}

TEST_CASE("rcEncode never mutates learned weights") {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ancestorLevels = 1;
  cfg.coderWindow = 128;
  cfg.predictorWindow = 128;
  ModelWeights model(cfg, 900);
  const uint64_t before = model.checksum();

  auto dataset = lidarSet(1, 6, 120, 900);
  RateAnchorTable table = calibrate(dataset, &model, 5, 6);
  const double target = 0.5 * (table.anchors[0].bpp + table.anchors[1].bpp);
  rcEncode(dataset[0], target, table, &model);
  CHECK(model.checksum() == before);
}

TEST_CASE("linearity deviation is zero for an exactly linear relation") {
  RateAnchor lo{7, 0.03, 1.0};
  RateAnchor hi{8, 0.015, 3.0};
  auto linear = [&](const PointCloud&, double qs) {
    return 1.0 + (qs - lo.qs) / (hi.qs - lo.qs) * (hi.bpp - lo.bpp);
  };
  auto dataset = lidarSet(1, 4, 50, 1000);
  CHECK(bppQsLinearityCheck(dataset, nullptr, lo, hi, 2, linear) == doctest::Approx(0.0));
  CHECK(bppQsLinearityCheck(dataset, nullptr, lo, hi, 5, linear) == doctest::Approx(0.0));
}

TEST_CASE("linearity check rejects a zero bpp range") {
  RateAnchor lo{7, 0.03, 1.0};
  RateAnchor same{8, 0.015, 1.0};
  auto dataset = lidarSet(1, 4, 50, 1100);
  CHECK_THROWS_AS(bppQsLinearityCheck(dataset, nullptr, lo, same, 3, {}), DomainError);
}

TEST_CASE("anchor csv roundtrip keeps provenance") {
  const std::string path = (std::filesystem::temp_directory_path() / "olc_anchors.csv").string();
  RateAnchorTable table;
  table.anchors = {{7, 0.03, 1.25}, {8, 0.015, 2.5}};
  table.modelChecksum = 0xdeadbeef12345678ull;
  table.dataset = "synthetic rings";
  writeAnchorCsv(path, table);

  RateAnchorTable back = readAnchorCsv(path);
  REQUIRE(back.anchors.size() == 2);
  CHECK(back.anchors[0].qs == table.anchors[0].qs);
  CHECK(back.anchors[1].bpp == table.anchors[1].bpp);
  CHECK(back.modelChecksum == table.modelChecksum);
  CHECK(back.dataset == "synthetic rings");
}

TEST_CASE("calibration results do not depend on the worker count") {
  auto dataset = lidarSet(4, 8, 200, 1200);
  RateAnchorTable serial = calibrate(dataset, nullptr, 5, 7, 1);
  RateAnchorTable pooled = calibrate(dataset, nullptr, 5, 7, 3);
  REQUIRE(serial.anchors.size() == pooled.anchors.size());
  for (size_t i = 0; i < serial.anchors.size(); ++i)
    CHECK(serial.anchors[i].bpp == pooled.anchors[i].bpp);
}
