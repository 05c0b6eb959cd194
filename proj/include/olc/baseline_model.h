// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_BASELINE_MODEL_H
#define OLC_BASELINE_MODEL_H

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "olc/common.h"

namespace olc {

// Coding-order chunk length when no learned model is loaded. Part of the
// bitstream semantics for baseline streams: both coder sides chunk levels
// identically before the checkerboard split.
constexpr int kBaselineCodingChunk = 1024;

// Non-learned fallback coder model: Laplace-smoothed frequency counts keyed
// by (level, octant, parent occupancy), updated after every coded symbol.
// Encoder and decoder replay the identical update sequence, so their tables
// stay bit-identical in lockstep.
class AdaptiveBaseline {
public:
  explicit AdaptiveBaseline(int symbolCount) : k_(symbolCount) {
    if (k_ < 2) throw DomainError("AdaptiveBaseline: symbol count must be >= 2");
  }

  std::vector<double> probabilities(int level, int octant, int parentOccupancy) const {
    std::vector<double> p(k_);
    auto it = counts_.find(key(level, octant, parentOccupancy));
    if (it == counts_.end()) {
      std::fill(p.begin(), p.end(), 1.0 / k_);
      return p;
    }
    uint64_t total = 0;
    for (uint32_t c : it->second) total += c;
    for (int i = 0; i < k_; ++i)
      p[i] = static_cast<double>(it->second[i] + 1) / static_cast<double>(total + k_);
    return p;
  }

  void update(int level, int octant, int parentOccupancy, int symbol) {
    if (symbol < 0 || symbol >= k_) throw DomainError("AdaptiveBaseline: symbol out of range");
    auto& c = counts_[key(level, octant, parentOccupancy)];
    if (c.empty()) c.assign(k_, 0);
    c[symbol] += 1;
  }

  int symbolCount() const { return k_; }

private:
  static uint32_t key(int level, int octant, int parentOccupancy) {
    return static_cast<uint32_t>(level) << 11 | static_cast<uint32_t>(octant) << 8
      | static_cast<uint32_t>(parentOccupancy);
  }

  int k_;
  std::unordered_map<uint32_t, std::vector<uint32_t>> counts_;
};

}  // namespace olc

#endif
