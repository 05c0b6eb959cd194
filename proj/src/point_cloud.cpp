// SPDX-License-Identifier: Apache-2.0

#include "olc/point_cloud.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace olc {

void PointCloud::recomputeBbox() {
  if (points.empty()) {
    bboxMin = bboxMax = {0, 0, 0};
    return;
  }
  bboxMin = bboxMax = points[0];
  for (const auto& p : points) {
    bboxMin = Vec3d::min(bboxMin, p);
    bboxMax = Vec3d::max(bboxMax, p);
  }
}

double PointCloud::maxExtent() const {
  Vec3d e = bboxMax - bboxMin;
  return e.maxComponent();
}

PointCloud makeCloud(std::vector<Vec3d> points) {
  PointCloud pc;
  pc.points = std::move(points);
  pc.recomputeBbox();
  return pc;
}

std::pair<PointCloud, NormalizationRecord> normalize(const PointCloud& pc) {
  if (pc.empty()) throw DomainError("normalize: empty point cloud");
  double extent = pc.maxExtent();
  if (extent <= 0.0) throw DomainError("normalize: degenerate extent (all points identical)");

  NormalizationRecord rec;
  rec.scale = 2.0 / extent;
  rec.offset = pc.bboxMin;

  PointCloud out;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points) {
    out.points.push_back({(p.x - rec.offset.x) * rec.scale - 1.0,
                          (p.y - rec.offset.y) * rec.scale - 1.0,
                          (p.z - rec.offset.z) * rec.scale - 1.0});
  }
  out.recomputeBbox();
  return {std::move(out), rec};
}

PointCloud denormalize(const PointCloud& pc, const NormalizationRecord& rec) {
  PointCloud out;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points) {
    out.points.push_back({(p.x + 1.0) / rec.scale + rec.offset.x,
                          (p.y + 1.0) / rec.scale + rec.offset.y,
                          (p.z + 1.0) / rec.scale + rec.offset.z});
  }
  out.recomputeBbox();
  return out;
}

double computeQs(double bboxExtent, int depth) {
  if (depth < 1) throw DomainError("computeQs: depth must be >= 1");
  if (!(bboxExtent > 0.0)) throw DomainError("computeQs: extent must be positive");
  return bboxExtent / (std::exp2(depth) - 1.0);
}

namespace {

// round half away from zero, component-wise
int32_t roundAway(double v) {
  return static_cast<int32_t>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

}  // namespace

QuantizedCloud quantize(const PointCloud& pc, double qs) {
  if (pc.empty()) throw DomainError("quantize: empty point cloud");
  if (!(qs > 0.0)) throw DomainError("quantize: qs must be positive");

  QuantizedCloud qc;
  qc.qs = qs;
  qc.origin = pc.bboxMin;
  qc.sourceCount = pc.size();

  std::vector<uint64_t> codes;
  codes.reserve(pc.size());
  int32_t maxCoord = 0;
  for (const auto& p : pc.points) {
    Vec3i c{roundAway((p.x - qc.origin.x) / qs), roundAway((p.y - qc.origin.y) / qs),
            roundAway((p.z - qc.origin.z) / qs)};
    maxCoord = std::max({maxCoord, c.x, c.y, c.z});
    if (maxCoord >= (1 << 21))
      throw DomainError("quantize: qs too small, grid exceeds 21 bits per axis");
    codes.push_back(mortonEncode(c));
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());

  qc.coords.reserve(codes.size());
  for (uint64_t m : codes) qc.coords.push_back(mortonDecode(m));

  int depth = 1;
  while ((int64_t{1} << depth) <= maxCoord) ++depth;
  qc.depth = depth;
  return qc;
}

PointCloud dequantize(const QuantizedCloud& qc) {
  PointCloud out;
  out.points.reserve(qc.coords.size());
  for (const auto& c : qc.coords) {
    out.points.push_back({qc.origin.x + c.x * qc.qs, qc.origin.y + c.y * qc.qs,
                          qc.origin.z + c.z * qc.qs});
  }
  out.recomputeBbox();
  return out;
}

std::vector<double> remainingRatio(const PointCloud& pc, const std::vector<double>& qsValues) {
  if (pc.empty()) throw DomainError("remainingRatio: empty point cloud");
  std::vector<double> ratios;
  ratios.reserve(qsValues.size());
  for (double qs : qsValues) {
    QuantizedCloud qc = quantize(pc, qs);
    ratios.push_back(static_cast<double>(qc.coords.size()) / static_cast<double>(qc.sourceCount));
  }
  return ratios;
}

}  // namespace olc
