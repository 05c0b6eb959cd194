// SPDX-License-Identifier: Apache-2.0

#include "olc/bitstream.h"

#include <algorithm>
#include <cstring>

#include "olc/baseline_model.h"

namespace olc {

namespace {

void putU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void putF64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  putU64(out, bits);
}

uint64_t getU64(std::span<const uint8_t> b, size_t off) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[off + i]) << (8 * i);
  return v;
}

double getF64(std::span<const uint8_t> b, size_t off) {
  uint64_t bits = getU64(b, off);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::vector<uint8_t> Bitstream::bytes() const {
  std::vector<uint8_t> out;
  out.reserve(totalBytes());
  for (uint8_t b : BitstreamHeader::kMagic) out.push_back(b);
  out.push_back(header.version);
  out.push_back(header.depth);
  out.push_back(header.steps);
  out.push_back(header.flags);
  putF64(out, header.qs);
  putF64(out, header.origin.x);
  putF64(out, header.origin.y);
  putF64(out, header.origin.z);
  putU64(out, header.sourceCount);
  putU64(out, header.modelChecksum);
  putU64(out, header.payloadLengths[0]);
  putU64(out, header.payloadLengths[1]);
  out.insert(out.end(), nonLeafPayload.begin(), nonLeafPayload.end());
  out.insert(out.end(), leafPayload.begin(), leafPayload.end());
  return out;
}

Bitstream Bitstream::parse(std::span<const uint8_t> bytes) {
  if (bytes.size() < BitstreamHeader::kBytes) throw CorruptionError("bitstream: truncated header");
  if (!std::equal(BitstreamHeader::kMagic.begin(), BitstreamHeader::kMagic.end(), bytes.begin()))
    throw CorruptionError("bitstream: bad magic");

  Bitstream bs;
  bs.header.version = bytes[4];
  if (bs.header.version != 1) throw CorruptionError("bitstream: unsupported version");
  bs.header.depth = bytes[5];
  bs.header.steps = bytes[6];
  bs.header.flags = bytes[7];
  bs.header.qs = getF64(bytes, 8);
  bs.header.origin = {getF64(bytes, 16), getF64(bytes, 24), getF64(bytes, 32)};
  bs.header.sourceCount = getU64(bytes, 40);
  bs.header.modelChecksum = getU64(bytes, 48);
  bs.header.payloadLengths = {getU64(bytes, 56), getU64(bytes, 64)};

  if (bs.header.depth < 1 || bs.header.steps > 8) throw CorruptionError("bitstream: bad header fields");
  const uint64_t expect =
    BitstreamHeader::kBytes + bs.header.payloadLengths[0] + bs.header.payloadLengths[1];
  if (bytes.size() != expect) throw CorruptionError("bitstream: truncated payload");

  size_t off = BitstreamHeader::kBytes;
  bs.nonLeafPayload.assign(bytes.begin() + off, bytes.begin() + off + bs.header.payloadLengths[0]);
  off += bs.header.payloadLengths[0];
  bs.leafPayload.assign(bytes.begin() + off, bytes.begin() + off + bs.header.payloadLengths[1]);
  return bs;
}

namespace {

// Coding order of one level chunk: Morton order, or group A then group B of
// the checkerboard parity split. Positions are window ranks; rows[i] is the
// chunk-relative node index coded at rank i, with groupASize marking the
// pass boundary.
struct ChunkOrder {
  std::vector<uint32_t> order;  // chunk-relative node indices in coding order
  size_t groupASize = 0;
};

ChunkOrder chunkOrder(const std::vector<OctreeNode>& nodes, size_t base, size_t end,
                      bool checkerboard) {
  ChunkOrder co;
  const size_t n = end - base;
  if (!checkerboard) {
    co.order.resize(n);
    for (size_t i = 0; i < n; ++i) co.order[i] = static_cast<uint32_t>(i);
    co.groupASize = n;
    return co;
  }
  std::vector<OctreeNode> chunk(nodes.begin() + base, nodes.begin() + end);
  CheckerboardGroups g = checkerboardPartition(chunk);
  co.order = g.groupA;
  co.groupASize = g.groupA.size();
  co.order.insert(co.order.end(), g.groupB.begin(), g.groupB.end());
  return co;
}

// Occupancy symbols of one non-leaf level, coded chunk by chunk. `known`
// tracks which occupancies the decoder has already seen; the encoder reveals
// them in the same order so both sides build identical windows.
template<typename SymbolFn>
void codeNonLeafLevel(std::vector<std::vector<OctreeNode>>& levels, int level,
                      const ModelWeights* model, AdaptiveBaseline* baseline, bool checkerboard,
                      std::vector<ProbabilityTable>* trace, SymbolFn&& codeSymbol) {
  auto& nodes = levels[level];
  const int cap = model ? model->config().coderWindow : kBaselineCodingChunk;
  const int D = model ? model->config().ancestorLevels : 1;

  std::vector<uint8_t> knownOcc(nodes.size(), 0);
  for (size_t base = 0; base < nodes.size(); base += cap) {
    const size_t end = std::min(nodes.size(), base + cap);
    ChunkOrder co = chunkOrder(nodes, base, end, checkerboard);

    auto runPass = [&](size_t rowBegin, size_t rowEnd) {
      std::vector<std::vector<double>> rows;
      if (model) {
        ContextWindow win;
        win.entries.reserve(co.order.size());
        for (uint32_t rel : co.order)
          win.entries.push_back(buildStack(levels, level, base + rel, D, knownOcc[base + rel]));
        rows = forward(*model, win, Head::NonLeaf);
      }
      for (size_t r = rowBegin; r < rowEnd; ++r) {
        const size_t idx = base + co.order[r];
        ProbabilityTable table;
        if (model) {
          table = quantizeProbs(rows[r]);
        } else {
          const OctreeNode& n = nodes[idx];
          const int parentOcc =
            n.parentIndex >= 0 ? levels[level - 1][n.parentIndex].occupancy : 0;
          table = quantizeProbs(baseline->probabilities(level, n.octant, parentOcc));
        }
        if (trace) trace->push_back(table);
        const int symbol = codeSymbol(idx, table);  // occupancy - 1
        nodes[idx].occupancy = static_cast<uint8_t>(symbol + 1);
        knownOcc[idx] = nodes[idx].occupancy;
        if (!model) {
          const OctreeNode& n = nodes[idx];
          const int parentOcc =
            n.parentIndex >= 0 ? levels[level - 1][n.parentIndex].occupancy : 0;
          baseline->update(level, n.octant, parentOcc, symbol);
        }
      }
    };
    runPass(0, co.groupASize);
    if (co.groupASize < co.order.size()) runPass(co.groupASize, co.order.size());
  }
}

// Children of a fully decoded level, in the same order buildOctree emits
// them: parents in Morton order, octants ascending.
std::vector<OctreeNode> expandLevel(const std::vector<OctreeNode>& parents, int parentLevel) {
  std::vector<OctreeNode> children;
  for (size_t pi = 0; pi < parents.size(); ++pi) {
    const OctreeNode& p = parents[pi];
    for (int k = 0; k < 8; ++k) {
      if (p.occupancy & (1u << k)) {
        OctreeNode c;
        c.level = parentLevel + 1;
        c.octant = static_cast<uint8_t>(k);
        c.cellOrigin = {p.cellOrigin.x * 2 + (k & 1), p.cellOrigin.y * 2 + ((k >> 1) & 1),
                        p.cellOrigin.z * 2 + ((k >> 2) & 1)};
        c.parentIndex = static_cast<int32_t>(pi);
        children.push_back(c);
      }
    }
  }
  return children;
}

}  // namespace

EncodeResult encode(const PointCloud& pc, const CodecConfig& config,
                    std::vector<ProbabilityTable>* trace) {
  if (config.depth.has_value() == config.qs.has_value())
    throw UsageError("encode: exactly one of depth or qs must be given");
  if (config.depth && (*config.depth < 1 || *config.depth > 21))
    throw UsageError("encode: depth must be in [1,21]");
  if (config.steps < 0 || config.steps > 8) throw UsageError("encode: steps must be in [0,8]");
  if (pc.empty()) throw DomainError("encode: empty point cloud");

  double qs = config.qs ? *config.qs : computeQs(pc.maxExtent(), *config.depth);
  QuantizedCloud qc = quantize(pc, qs);
  Octree tree = buildOctree(qc);

  Bitstream bs;
  bs.header.depth = static_cast<uint8_t>(tree.depth);
  bs.header.steps = static_cast<uint8_t>(config.steps);
  bs.header.qs = qs;
  bs.header.origin = qc.origin;
  bs.header.sourceCount = qc.sourceCount;
  if (config.model) {
    bs.header.flags |= BitstreamHeader::kFlagLearned;
    bs.header.modelChecksum = config.model->checksum();
  }
  if (config.checkerboard) bs.header.flags |= BitstreamHeader::kFlagCheckerboard;

  // Non-leaf segment. The encoder masks occupancies exactly as the decoder
  // will see them, so probabilities match bit for bit.
  {
    RangeEncoder enc;
    AdaptiveBaseline baseline(255);
    uint64_t symbols = 0;
    // work on a copy whose occupancies get revealed in coding order
    std::vector<std::vector<OctreeNode>> shadow = tree.levels;
    for (int l = 0; l + 1 < tree.depth; ++l) {
      for (auto& n : shadow[l]) n.occupancy = 0;
      const auto& truth = tree.levels[l];
      codeNonLeafLevel(shadow, l, config.model, &baseline, config.checkerboard, trace,
                       [&](size_t idx, const ProbabilityTable& table) {
                         const int symbol = truth[idx].occupancy - 1;
                         enc.encode(symbol, table);
                         ++symbols;
                         return symbol;
                       });
    }
    if (symbols > 0) bs.nonLeafPayload = enc.finish();
  }

  // Leaf segment.
  LeafCodingPlan plan;
  plan.steps = config.steps;
  Bitpayload leaf = encodeLeafLossless(tree.levels, plan, config.model, trace);
  bs.leafPayload = std::move(leaf.bytes);

  bs.header.payloadLengths = {bs.nonLeafPayload.size(), bs.leafPayload.size()};

  EncodeResult res;
  res.bpp = static_cast<double>(bs.totalBytes()) * 8.0 / static_cast<double>(qc.sourceCount);
  res.stream = std::move(bs);
  return res;
}

QuantizedCloud decodeQuantized(const Bitstream& bs, const ModelWeights* model,
                               std::vector<ProbabilityTable>* trace) {
  const BitstreamHeader& h = bs.header;
  if (h.learned()) {
    if (!model) throw ChecksumMismatchError("decode: bitstream requires a learned model");
    if (model->checksum() != h.modelChecksum)
      throw ChecksumMismatchError("decode: model checksum mismatch");
  }
  const ModelWeights* m = h.learned() ? model : nullptr;

  std::vector<std::vector<OctreeNode>> levels(h.depth);
  OctreeNode root;
  root.level = 0;
  levels[0].push_back(root);

  if (h.depth > 1) {
    if (bs.nonLeafPayload.empty()) throw CorruptionError("decode: missing non-leaf payload");
    RangeDecoder dec(bs.nonLeafPayload);
    AdaptiveBaseline baseline(255);
    for (int l = 0; l + 1 < h.depth; ++l) {
      codeNonLeafLevel(levels, l, m, &baseline, h.checkerboard(), trace,
                       [&](size_t, const ProbabilityTable& table) { return dec.decode(table); });
      levels[l + 1] = expandLevel(levels[l], l);
    }
  }

  LeafCodingPlan plan;
  plan.steps = h.steps;
  Bitpayload leafPayload;
  leafPayload.bytes = bs.leafPayload;
  std::vector<uint8_t> occ = decodeLeaf(leafPayload, levels, plan, m, trace);
  for (size_t i = 0; i < levels.back().size(); ++i) levels.back()[i].occupancy = occ[i];

  Octree tree;
  tree.depth = h.depth;
  tree.levels = std::move(levels);
  tree.qs = h.qs;
  tree.origin = h.origin;
  tree.sourceCount = h.sourceCount;
  return reconstruct(tree);
}

PointCloud decode(const Bitstream& bs, const ModelWeights* model,
                  std::vector<ProbabilityTable>* trace) {
  return dequantize(decodeQuantized(bs, model, trace));
}

}  // namespace olc
