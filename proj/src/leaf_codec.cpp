// SPDX-License-Identifier: Apache-2.0

#include "olc/leaf_codec.h"

#include <algorithm>

#include "olc/baseline_model.h"
#include "olc/bitstream.h"
#include "olc/metrics.h"

namespace olc {

namespace {

int chunkCapacity(const ModelWeights* model) {
  return model ? model->config().coderWindow : kBaselineCodingChunk;
}

ContextWindow buildLeafWindow(const std::vector<std::vector<OctreeNode>>& levels, size_t base,
                              size_t end, int ancestorLevels,
                              std::span<const uint8_t> partialOcc) {
  const int leafLevel = static_cast<int>(levels.size()) - 1;
  ContextWindow win;
  win.entries.reserve(end - base);
  for (size_t i = base; i < end; ++i)
    win.entries.push_back(buildStack(levels, leafLevel, i, ancestorLevels, partialOcc[i]));
  return win;
}

}  // namespace

void LeafCodingPlan::validate() const {
  if (steps < 0 || steps > 8) throw DomainError("leaf lossless steps must be in [0,8]");
  std::array<bool, 8> seen{};
  for (int b : bitOrder) {
    if (b < 0 || b > 7 || seen[b]) throw DomainError("bitOrder must be a permutation of 0..7");
    seen[b] = true;
  }
}

uint8_t LeafCodingPlan::partialMask(int t) const {
  uint8_t mask = 0;
  for (int u = 0; u < t; ++u) mask |= static_cast<uint8_t>(1u << bitOrder[u]);
  return mask;
}

Bitpayload encodeLeafLossless(const std::vector<std::vector<OctreeNode>>& levels,
                              const LeafCodingPlan& plan, const ModelWeights* model,
                              std::vector<ProbabilityTable>* trace) {
  plan.validate();
  const auto& leaves = levels.back();
  const int leafLevel = static_cast<int>(levels.size()) - 1;

  Bitpayload payload;
  if (plan.steps == 0) return payload;  // fully predicted: nothing on the wire

  RangeEncoder enc;
  AdaptiveBaseline baseline(2);
  const int cap = chunkCapacity(model);
  const int D = model ? model->config().ancestorLevels : 1;

  std::vector<uint8_t> partial(leaves.size(), 0);
  for (size_t base = 0; base < leaves.size(); base += cap) {
    const size_t end = std::min(leaves.size(), base + cap);
    std::fill(partial.begin() + base, partial.begin() + end, 0);
    for (int t = 0; t < plan.steps; ++t) {
      const int plane = plan.bitOrder[t];
      std::vector<std::vector<double>> rows;
      if (model) rows = forward(*model, buildLeafWindow(levels, base, end, D, partial), Head::LeafBit);
      for (size_t i = base; i < end; ++i) {
        const int bit = (leaves[i].occupancy >> plane) & 1;
        ProbabilityTable table;
        if (model) {
          table = quantizeProbs(rows[i - base]);
        } else {
          const auto& n = leaves[i];
          int parentOcc = n.parentIndex >= 0 ? levels[leafLevel - 1][n.parentIndex].occupancy : 0;
          table = quantizeProbs(baseline.probabilities(leafLevel, n.octant, parentOcc));
          baseline.update(leafLevel, n.octant, parentOcc, bit);
        }
        if (trace) trace->push_back(table);
        enc.encode(bit, table);
        ++payload.symbolCount;
      }
      for (size_t i = base; i < end; ++i)
        partial[i] = leaves[i].occupancy & plan.partialMask(t + 1);
    }
  }
  payload.bytes = enc.finish();
  return payload;
}

std::vector<uint8_t> decodeLeaf(const Bitpayload& payload,
                                const std::vector<std::vector<OctreeNode>>& levels,
                                const LeafCodingPlan& plan, const ModelWeights* model,
                                std::vector<ProbabilityTable>* trace) {
  plan.validate();
  const auto& leaves = levels.back();
  const int leafLevel = static_cast<int>(levels.size()) - 1;
  const int D = model ? model->config().ancestorLevels : 1;

  std::vector<uint8_t> partial(leaves.size(), 0);

  if (plan.steps > 0) {
    if (payload.bytes.empty()) throw CorruptionError("decodeLeaf: missing leaf payload");
    RangeDecoder dec(payload.bytes);
    AdaptiveBaseline baseline(2);
    const int cap = chunkCapacity(model);
    for (size_t base = 0; base < leaves.size(); base += cap) {
      const size_t end = std::min(leaves.size(), base + cap);
      for (int t = 0; t < plan.steps; ++t) {
        const int plane = plan.bitOrder[t];
        std::vector<std::vector<double>> rows;
        if (model)
          rows = forward(*model, buildLeafWindow(levels, base, end, D, partial), Head::LeafBit);
        for (size_t i = base; i < end; ++i) {
          ProbabilityTable table;
          if (model) {
            table = quantizeProbs(rows[i - base]);
          } else {
            const auto& n = leaves[i];
            int parentOcc = n.parentIndex >= 0 ? levels[leafLevel - 1][n.parentIndex].occupancy : 0;
            table = quantizeProbs(baseline.probabilities(leafLevel, n.octant, parentOcc));
          }
          if (trace) trace->push_back(table);
          const int bit = dec.decode(table);
          if (!model) {
            const auto& n = leaves[i];
            int parentOcc = n.parentIndex >= 0 ? levels[leafLevel - 1][n.parentIndex].occupancy : 0;
            baseline.update(leafLevel, n.octant, parentOcc, bit);
          }
          if (bit) partial[i] |= static_cast<uint8_t>(1u << plane);
        }
      }
    }
  }

  std::vector<uint8_t> occ = partial;
  if (plan.steps < 8) {
    // lossy phase: predictor output, zero payload
    const int cap = model ? model->config().predictorWindow : kBaselineCodingChunk;
    for (size_t base = 0; base < leaves.size(); base += cap) {
      const size_t end = std::min(leaves.size(), base + cap);
      std::vector<std::vector<double>> rows;
      if (model)
        rows = forward(*model, buildLeafWindow(levels, base, end, D, partial), Head::LeafPredict);
      for (size_t i = base; i < end; ++i) {
        std::array<double, 8> sigma;
        sigma.fill(0.5);
        if (model)
          for (int j = 0; j < 8; ++j) sigma[j] = rows[i - base][j];
        for (int t = plan.steps; t < 8; ++t) {
          const int plane = plan.bitOrder[t];
          if (sigma[plane] > 0.5) occ[i] |= static_cast<uint8_t>(1u << plane);
        }
        if (occ[i] == 0) {
          // forced-bit repair: an existing node cannot be empty
          int bestPlane = plan.bitOrder[plan.steps];
          for (int t = plan.steps; t < 8; ++t) {
            const int plane = plan.bitOrder[t];
            if (sigma[plane] > sigma[bestPlane]) bestPlane = plane;
          }
          occ[i] |= static_cast<uint8_t>(1u << bestPlane);
        }
      }
    }
  }
  return occ;
}

std::vector<RdSweepRow> rdSweep(const PointCloud& pc, int depth, const ModelWeights* model,
                                bool checkerboard, std::span<const int> sValues) {
  std::vector<int> order(sValues.begin(), sValues.end());
  std::sort(order.begin(), order.end());

  const double peak = std::exp2(depth) - 1.0;
  QuantizedCloud reference = quantize(pc, computeQs(pc.maxExtent(), depth));
  PointCloud refGrid;
  for (const auto& c : reference.coords)
    refGrid.points.push_back({static_cast<double>(c.x), static_cast<double>(c.y),
                              static_cast<double>(c.z)});
  refGrid.recomputeBbox();

  std::vector<RdSweepRow> rows;
  for (int s : order) {
    CodecConfig cfg;
    cfg.depth = depth;
    cfg.steps = s;
    cfg.checkerboard = checkerboard;
    cfg.model = model;
    EncodeResult enc = encode(pc, cfg);
    QuantizedCloud dec = decodeQuantized(enc.stream, model);

    PointCloud testGrid;
    for (const auto& c : dec.coords)
      testGrid.points.push_back({static_cast<double>(c.x), static_cast<double>(c.y),
                                 static_cast<double>(c.z)});
    testGrid.recomputeBbox();

    RdSweepRow row;
    row.steps = s;
    row.bpp = enc.bpp;
    row.d1Psnr = d1Psnr(refGrid, testGrid, peak);
    row.d2Psnr = d2Psnr(refGrid, testGrid, peak);
    row.chamfer = chamferDistance(refGrid, testGrid);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace olc
