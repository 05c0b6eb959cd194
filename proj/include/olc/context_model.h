// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_CONTEXT_MODEL_H
#define OLC_CONTEXT_MODEL_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "olc/octree.h"

namespace olc {

// One feature slot. Occupancy 0 is the shared padding/mask sentinel: real
// nodes always carry 1..255, so no extra vocabulary slot is needed.
struct NodeFeatures {
  int occupancy = 0;
  int level = 0;
  int octant = 0;
  Vec3i position{0, 0, 0};  // cell coordinate at `level`
};

// Per-node stack: D ancestors oldest-first, then the node itself.
struct FeatureStack {
  std::vector<NodeFeatures> slots;
};

struct ContextWindow {
  std::vector<FeatureStack> entries;
  size_t size() const { return entries.size(); }
};

enum class Head { NonLeaf, LeafBit, LeafPredict };

constexpr int headWidth(Head h) {
  switch (h) {
    case Head::NonLeaf: return 255;  // occupancy codes 1..255, class k <-> code k+1
    case Head::LeafBit: return 2;
    case Head::LeafPredict: return 8;
  }
  return 0;
}

struct ModelConfig {
  int dim = 128;
  int layers = 4;
  int heads = 4;
  int ancestorLevels = 4;  // D
  int maxLevels = 21;
  int coderWindow = 1024;
  int predictorWindow = 2048;

  void validate() const;
  int headDim() const { return dim / heads; }
  int ffDim() const { return 4 * dim; }
};

// Offsets into the flat parameter vector.
struct ParamLayout {
  struct Block {
    size_t ln1g, ln1b, wq, wk, wv, wo, ln2g, ln2b, w1, b1, w2, b2;
  };
  size_t occEmb, levelEmb, octEmb, posProj;
  std::vector<Block> blocks;
  size_t lnFg, lnFb;
  size_t headNL, headNLb, headLB, headLBb, headLP, headLPb;
  size_t total;

  static ParamLayout make(const ModelConfig& cfg);
};

class ModelWeights {
public:
  ModelWeights() : ModelWeights(ModelConfig{}, 0) {}
  ModelWeights(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::span<double> at(size_t offset, size_t count) { return {params_.data() + offset, count}; }
  std::span<const double> at(size_t offset, size_t count) const {
    return {params_.data() + offset, count};
  }

  // FNV-1a over the serialized checkpoint form (f32 little-endian blob).
  uint64_t checksum() const;
  std::vector<uint8_t> serialize() const;

  // Rounds parameters through f32 so the in-memory values match their
  // checkpoint image bit for bit. Called after init and training.
  void canonicalize();

private:
  ModelConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
};

// Rotates consecutive pairs by pos * 10000^(-2k/d). Isometric, and attention
// scores between rotated vectors depend only on the position difference.
std::vector<double> ropeRotate(std::span<const double> embedding, int posIndex);

// Stack for levels[level][index]: missing ancestors become sentinel slots,
// self occupancy is `selfOccupancy` (0 while the node is the coding target,
// partial bits during leaf bit-plane coding).
FeatureStack buildStack(const std::vector<std::vector<OctreeNode>>& levels, int level, size_t index,
                        int ancestorLevels, int selfOccupancy);

FeatureStack extractContext(const Octree& tree, int level, size_t index, int ancestorLevels,
                            bool maskSelf = true);

// Per-entry probability rows under causal attention: softmax distributions
// for the coding heads, eight independent logistic bit probabilities for the
// predictor head.
std::vector<std::vector<double>> forward(const ModelWeights& weights, const ContextWindow& window,
                                         Head head);

void saveCheckpoint(const ModelWeights& weights, const std::string& path);
ModelWeights loadCheckpoint(const std::string& path);

}  // namespace olc

#endif
