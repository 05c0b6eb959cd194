// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_RANGE_CODER_H
#define OLC_RANGE_CODER_H

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "olc/common.h"

namespace olc {

// Fixed-point symbol weights: every weight >= 1, sum exactly 2^16. The floor
// keeps any symbol decodable even when a model assigns it ~zero probability.
struct ProbabilityTable {
  std::vector<uint32_t> weights;
  std::vector<uint32_t> cum;  // exclusive prefix sums, cum.size() == weights.size()

  static constexpr uint32_t kTotal = 1u << 16;

  int symbolCount() const { return static_cast<int>(weights.size()); }
  bool operator==(const ProbabilityTable& o) const { return weights == o.weights; }
};

ProbabilityTable makeTable(std::vector<uint32_t> weights);

// Largest-remainder apportionment of real probabilities onto the 2^16 grid.
// Deterministic; ties break to the lower index. Throws on negative input.
ProbabilityTable quantizeProbs(std::span<const double> p);

struct Bitpayload {
  std::vector<uint8_t> bytes;
  uint64_t symbolCount = 0;
};

// Carry-less 32-bit range coder (Subbotin style), 16-bit probability
// precision. Integer-only: identical inputs give byte-identical output on
// every platform.
class RangeEncoder {
public:
  void encode(int symbol, const ProbabilityTable& table);
  std::vector<uint8_t> finish();
  size_t bytesWritten() const { return out_.size(); }

private:
  void normalize();

  static constexpr uint32_t kTop = 1u << 24;
  static constexpr uint32_t kBot = 1u << 16;
  uint32_t low_ = 0;
  uint32_t range_ = 0xffffffffu;
  std::vector<uint8_t> out_;
  bool finished_ = false;
};

class RangeDecoder {
public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);
  int decode(const ProbabilityTable& table);

private:
  uint8_t nextByte();

  static constexpr uint32_t kTop = 1u << 24;
  static constexpr uint32_t kBot = 1u << 16;
  uint32_t low_ = 0;
  uint32_t range_ = 0xffffffffu;
  uint32_t code_ = 0;
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

// Batch helpers. Decoding accepts either the full table sequence or a lazy
// generator that sees the already-decoded prefix (auto-regressive contract).
Bitpayload encodeSymbols(std::span<const int> symbols, std::span<const ProbabilityTable> tables);
std::vector<int> decodeSymbols(const Bitpayload& payload, std::span<const ProbabilityTable> tables);
std::vector<int> decodeSymbols(const Bitpayload& payload, uint64_t symbolCount,
                               const std::function<ProbabilityTable(std::span<const int>)>& nextTable);

// Ideal code length in bits under the quantized tables; the coder's payload
// stays within a small constant plus 0.01 bits/symbol of this.
double crossEntropyBits(std::span<const int> symbols, std::span<const ProbabilityTable> tables);

}  // namespace olc

#endif
