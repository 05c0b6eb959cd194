// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_BITSTREAM_H
#define OLC_BITSTREAM_H

#include <array>
#include <optional>

#include "olc/context_model.h"
#include "olc/leaf_codec.h"
#include "olc/point_cloud.h"
#include "olc/range_coder.h"

namespace olc {

// Container layout (all little-endian, normative):
//   magic "OLC1" | version u8 | depth u8 | s u8 | flags u8 |
//   qs f64 | origin 3xf64 | source_count u64 | model_checksum u64 |
//   payload_length u64 x2 (non-leaf, leaf) | payloads
// flags: bit0 = learned model, bit1 = checkerboard grouping.
struct BitstreamHeader {
  static constexpr std::array<uint8_t, 4> kMagic = {'O', 'L', 'C', '1'};
  static constexpr size_t kBytes = 72;
  static constexpr uint8_t kFlagLearned = 0x01;
  static constexpr uint8_t kFlagCheckerboard = 0x02;

  uint8_t version = 1;
  uint8_t depth = 1;
  uint8_t steps = 8;
  uint8_t flags = 0;
  double qs = 1.0;
  Vec3d origin{0, 0, 0};
  uint64_t sourceCount = 0;
  uint64_t modelChecksum = 0;
  std::array<uint64_t, 2> payloadLengths = {0, 0};

  bool learned() const { return flags & kFlagLearned; }
  bool checkerboard() const { return flags & kFlagCheckerboard; }
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> nonLeafPayload;
  std::vector<uint8_t> leafPayload;

  std::vector<uint8_t> bytes() const;
  size_t totalBytes() const {
    return BitstreamHeader::kBytes + nonLeafPayload.size() + leafPayload.size();
  }

  // Validates magic, version and that the byte count matches the recorded
  // payload lengths exactly; truncation surfaces here as CorruptionError.
  static Bitstream parse(std::span<const uint8_t> bytes);
};

struct CodecConfig {
  std::optional<int> depth;  // exactly one of depth/qs
  std::optional<double> qs;  // raw-frame quantization step
  int steps = 8;
  bool checkerboard = false;
  const ModelWeights* model = nullptr;  // nullptr selects the adaptive baseline
};

struct EncodeResult {
  Bitstream stream;
  double bpp = 0.0;  // (header + payload bits) / source point count
};

// Pipeline: quantize -> octree -> non-leaf coding level by level (group A
// then B within a level when checkerboard is on) -> leaf bit planes -> leaf
// prediction happens decoder-side only. Deterministic for fixed inputs.
// `trace` collects every quantized probability table in coding order.
EncodeResult encode(const PointCloud& pc, const CodecConfig& config,
                    std::vector<ProbabilityTable>* trace = nullptr);

QuantizedCloud decodeQuantized(const Bitstream& bs, const ModelWeights* model = nullptr,
                               std::vector<ProbabilityTable>* trace = nullptr);
PointCloud decode(const Bitstream& bs, const ModelWeights* model = nullptr,
                  std::vector<ProbabilityTable>* trace = nullptr);

}  // namespace olc

#endif
