// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_POINT_CLOUD_H
#define OLC_POINT_CLOUD_H

#include <cstdint>
#include <vector>

#include "olc/common.h"

namespace olc {

struct PointCloud {
  std::vector<Vec3d> points;
  Vec3d bboxMin{0, 0, 0};
  Vec3d bboxMax{0, 0, 0};

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void recomputeBbox();

  // Largest single-axis extent; the scalar fed into the qs formula.
  double maxExtent() const;
};

PointCloud makeCloud(std::vector<Vec3d> points);

struct NormalizationRecord {
  double scale = 1.0;   // uniform factor, 2 / max-axis-extent
  Vec3d offset{0, 0, 0};  // bboxMin of the source cloud
};

struct QuantizedCloud {
  std::vector<Vec3i> coords;  // deduplicated, Morton-sorted
  int depth = 1;              // smallest L with all coords < 2^L
  double qs = 1.0;
  Vec3d origin{0, 0, 0};
  uint64_t sourceCount = 0;  // points before deduplication
};

// Maps points into [-1,1]^3 with a single scale factor on all axes.
// Fails with DomainError when every point is identical (zero extent).
std::pair<PointCloud, NormalizationRecord> normalize(const PointCloud& pc);
PointCloud denormalize(const PointCloud& pc, const NormalizationRecord& rec);

// qs for a target octree depth: extent / (2^L - 1).
double computeQs(double bboxExtent, int depth);

// Grid coordinates round((p - bboxMin) / qs) with round-half-away-from-zero,
// duplicates merged. Depth is the smallest L that covers all coordinates.
QuantizedCloud quantize(const PointCloud& pc, double qs);
PointCloud dequantize(const QuantizedCloud& qc);

// |quantize(pc, qs).coords| / source_count for each qs, input order kept.
std::vector<double> remainingRatio(const PointCloud& pc, const std::vector<double>& qsValues);

}  // namespace olc

#endif
