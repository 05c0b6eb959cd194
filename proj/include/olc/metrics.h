// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_METRICS_H
#define OLC_METRICS_H

#include <span>
#include <string>
#include <vector>

#include "olc/point_cloud.h"

namespace olc {

struct RdPoint {
  std::string label;
  double bpp = 0.0;        // total bits / original point count
  double d1Psnr = 0.0;     // dB, +inf allowed
  double d2Psnr = 0.0;
  double chamfer = 0.0;
};

// Symmetric point-to-point PSNR: 10*log10(3*peak^2 / max(mse_fwd, mse_bwd)),
// +inf on exact match. peak is conventionally 2^L - 1 at coded depth L.
double d1Psnr(const PointCloud& ref, const PointCloud& test, double peak);

// Point-to-plane PSNR with normals estimated on ref by a covariance plane
// fit over k nearest neighbors. Degenerate neighborhoods fall back to the
// point-to-point displacement and are counted in *degenerateCount.
double d2Psnr(const PointCloud& ref, const PointCloud& test, double peak, int k = 8,
              int* degenerateCount = nullptr);

// mean squared NN distance ref->test plus test->ref
double chamferDistance(const PointCloud& ref, const PointCloud& test);

// |target - achieved| / target
double bitError(double targetRate, double achievedRate);

enum class Quality { D1, D2 };

struct BdResult {
  double percent = 0.0;   // negative: curveB cheaper at equal quality
  bool nonMonotone = false;
};

// Bjontegaard delta rate: cubic fit of log10(bpp) over PSNR per curve,
// integrated across the common PSNR interval. Needs >= 4 points per curve
// with distinct PSNR and overlapping ranges.
BdResult bdRate(std::span<const RdPoint> curveA, std::span<const RdPoint> curveB, Quality quality);

void writeRdCsv(const std::string& path, std::span<const RdPoint> points);
std::vector<RdPoint> readRdCsv(const std::string& path);

}  // namespace olc

#endif
