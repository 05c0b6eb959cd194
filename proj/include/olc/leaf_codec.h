// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_LEAF_CODEC_H
#define OLC_LEAF_CODEC_H

#include <array>
#include <optional>
#include <span>

#include "olc/context_model.h"
#include "olc/range_coder.h"

namespace olc {

// s transmitted bit planes, 8-s predicted at the decoder. The pipeline
// always uses the identity bit order (the container does not carry one);
// other orders are available at this API level for experiments.
struct LeafCodingPlan {
  int steps = 8;
  std::array<int, 8> bitOrder = {0, 1, 2, 3, 4, 5, 6, 7};

  void validate() const;
  // occupancy restricted to the planes coded before step t
  uint8_t partialMask(int t) const;
};

// Bit-plane t of every leaf is coded in one window pass conditioned on the
// ancestor features and the planes already coded (causal attention), so the
// encoder is parallel per plane while the decoder replays planes serially.
// model == nullptr selects the adaptive baseline bit coder.
// With steps == 0 the payload is empty.
Bitpayload encodeLeafLossless(const std::vector<std::vector<OctreeNode>>& levels,
                              const LeafCodingPlan& plan, const ModelWeights* model,
                              std::vector<ProbabilityTable>* trace = nullptr);

// Decodes the transmitted planes, then fills the remaining planes from the
// predictor head (threshold 0.5, ties to 0) without consuming payload. An
// all-zero result forces the highest-probability predicted bit to 1.
// model == nullptr uses the baseline bit coder and a uniform predictor.
std::vector<uint8_t> decodeLeaf(const Bitpayload& payload,
                                const std::vector<std::vector<OctreeNode>>& levels,
                                const LeafCodingPlan& plan, const ModelWeights* model,
                                std::vector<ProbabilityTable>* trace = nullptr);

struct RdSweepRow {
  int steps = 0;
  double bpp = 0.0;
  double d1Psnr = 0.0;
  double d2Psnr = 0.0;
  double chamfer = 0.0;
};

// Full encode/decode per s, metrics against the quantized input at the coded
// depth (grid coordinates, peak 2^depth - 1). Rows sorted by s.
std::vector<RdSweepRow> rdSweep(const PointCloud& pc, int depth, const ModelWeights* model,
                                bool checkerboard, std::span<const int> sValues);

}  // namespace olc

#endif
