// SPDX-License-Identifier: Apache-2.0

#include "olc/context_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "model_detail.h"

namespace olc {

void ModelConfig::validate() const {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("model dim must be even and >= 2");
  if (heads < 1 || dim % heads != 0) throw ConfigError("model dim must divide into heads");
  if ((dim / heads) % 2 != 0) throw ConfigError("head dimension must be even (rotary pairs)");
  if (layers < 1) throw ConfigError("model needs at least one layer");
  if (ancestorLevels < 1) throw ConfigError("ancestorLevels must be >= 1");
  if (maxLevels < 1 || maxLevels > 21) throw ConfigError("maxLevels out of range");
  if (coderWindow < 1 || predictorWindow < 1) throw ConfigError("window capacity must be >= 1");
}

ParamLayout ParamLayout::make(const ModelConfig& cfg) {
  cfg.validate();
  const size_t d = cfg.dim;
  const size_t ff = cfg.ffDim();
  ParamLayout lay{};
  size_t off = 0;
  auto take = [&off](size_t count) {
    size_t at = off;
    off += count;
    return at;
  };
  lay.occEmb = take(256 * d);
  lay.levelEmb = take(static_cast<size_t>(cfg.maxLevels) * d);
  lay.octEmb = take(8 * d);
  lay.posProj = take(3 * d);
  lay.blocks.resize(cfg.layers);
  for (auto& b : lay.blocks) {
    b.ln1g = take(d);
    b.ln1b = take(d);
    b.wq = take(d * d);
    b.wk = take(d * d);
    b.wv = take(d * d);
    b.wo = take(d * d);
    b.ln2g = take(d);
    b.ln2b = take(d);
    b.w1 = take(ff * d);
    b.b1 = take(ff);
    b.w2 = take(d * ff);
    b.b2 = take(d);
  }
  lay.lnFg = take(d);
  lay.lnFb = take(d);
  lay.headNL = take(255 * d);
  lay.headNLb = take(255);
  lay.headLB = take(2 * d);
  lay.headLBb = take(2);
  lay.headLP = take(8 * d);
  lay.headLPb = take(8);
  lay.total = off;
  return lay;
}

void ModelWeights::canonicalize() {
  for (double& p : params_) p = static_cast<float>(p);
}

ModelWeights::ModelWeights(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg), layout_(ParamLayout::make(cfg)), params_(layout_.total, 0.0) {
  Rng rng(seed ^ 0x6f6c6377ull);
  auto gauss = [&](size_t off, size_t count, double scale) {
    for (size_t i = 0; i < count; ++i) params_[off + i] = rng.nextGaussian() * scale;
  };
  const size_t d = cfg_.dim;
  const size_t ff = cfg_.ffDim();
  gauss(layout_.occEmb, 256 * d, 0.02);
  gauss(layout_.levelEmb, cfg_.maxLevels * d, 0.02);
  gauss(layout_.octEmb, 8 * d, 0.02);
  gauss(layout_.posProj, 3 * d, 0.02);
  for (const auto& b : layout_.blocks) {
    std::fill_n(params_.begin() + b.ln1g, d, 1.0);
    std::fill_n(params_.begin() + b.ln2g, d, 1.0);
    gauss(b.wq, d * d, 0.02);
    gauss(b.wk, d * d, 0.02);
    gauss(b.wv, d * d, 0.02);
    gauss(b.wo, d * d, 0.02);
    gauss(b.w1, ff * d, 0.02);
    gauss(b.w2, d * ff, 0.02);
  }
  std::fill_n(params_.begin() + layout_.lnFg, d, 1.0);
  // heads stay zero-initialized: every distribution starts uniform
  canonicalize();
}

std::vector<uint8_t> ModelWeights::serialize() const {
  std::vector<uint8_t> out;
  out.reserve(32 + params_.size() * 4 + 8);
  auto putU8 = [&](uint8_t v) { out.push_back(v); };
  auto putU32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto putU64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  for (char c : {'O', 'L', 'C', 'W'}) out.push_back(static_cast<uint8_t>(c));
  putU8(1);  // version
  putU8(static_cast<uint8_t>(cfg_.layers));
  putU8(static_cast<uint8_t>(cfg_.heads));
  putU8(static_cast<uint8_t>(cfg_.ancestorLevels));
  putU32(static_cast<uint32_t>(cfg_.dim));
  putU32(static_cast<uint32_t>(cfg_.maxLevels));
  putU32(static_cast<uint32_t>(cfg_.coderWindow));
  putU32(static_cast<uint32_t>(cfg_.predictorWindow));
  putU64(params_.size());
  for (double p : params_) {
    float f = static_cast<float>(p);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    putU32(bits);
  }
  putU64(fnv1a64(out));
  return out;
}

uint64_t ModelWeights::checksum() const {
  std::vector<uint8_t> blob = serialize();
  uint64_t sum = 0;
  std::memcpy(&sum, blob.data() + blob.size() - 8, 8);
  return sum;
}

std::vector<double> ropeRotate(std::span<const double> embedding, int posIndex) {
  const int d = static_cast<int>(embedding.size());
  if (d % 2 != 0) throw ConfigError("ropeRotate: dimension must be even");
  std::vector<double> out(embedding.begin(), embedding.end());
  detail::applyRope(out.data(), d, posIndex, false);
  return out;
}

FeatureStack buildStack(const std::vector<std::vector<OctreeNode>>& levels, int level, size_t index,
                        int ancestorLevels, int selfOccupancy) {
  FeatureStack stack;
  stack.slots.resize(ancestorLevels + 1);

  // walk parent links bottom-up, filling newest ancestor first
  int lv = level;
  size_t idx = index;
  for (int a = 1; a <= ancestorLevels; ++a) {
    int32_t parent = levels[lv][idx].parentIndex;
    if (lv == 0 || parent < 0) break;
    const OctreeNode& anc = levels[lv - 1][parent];
    stack.slots[ancestorLevels - a] =
      NodeFeatures{anc.occupancy, anc.level, anc.octant, anc.cellOrigin};
    lv -= 1;
    idx = static_cast<size_t>(parent);
  }
  const OctreeNode& self = levels[level][index];
  stack.slots[ancestorLevels] = NodeFeatures{selfOccupancy, self.level, self.octant, self.cellOrigin};
  return stack;
}

FeatureStack extractContext(const Octree& tree, int level, size_t index, int ancestorLevels,
                            bool maskSelf) {
  if (level < 0 || level >= tree.depth || index >= tree.levels[level].size())
    throw DomainError("extractContext: node does not exist");
  if (ancestorLevels < 1) throw DomainError("extractContext: ancestorLevels must be >= 1");
  int selfOcc = maskSelf ? 0 : tree.levels[level][index].occupancy;
  return buildStack(tree.levels, level, index, ancestorLevels, selfOcc);
}

namespace detail {

std::vector<std::vector<double>> forwardImpl(const ModelWeights& weights,
                                             const ContextWindow& window, Head head,
                                             ForwardCache* cache) {
  const ModelConfig& cfg = weights.config();
  const ParamLayout& lay = weights.layout();
  const int n = static_cast<int>(window.size());
  const int d = cfg.dim;
  const int ff = cfg.ffDim();
  const int nh = cfg.heads;
  const int hd = cfg.headDim();
  const int K = headWidth(head);
  if (n == 0) return {};

  const int stackLen = cfg.ancestorLevels + 1;
  for (const auto& e : window.entries)
    if (static_cast<int>(e.slots.size()) != stackLen)
      throw DomainError("forward: feature stack size mismatch");

  const auto& P = weights.params();
  const size_t nd = static_cast<size_t>(n) * d;

  ForwardCache local;
  ForwardCache& C = cache ? *cache : local;
  C.n = n;
  C.head = head;
  C.x0.assign(nd, 0.0);

  // --- token embeddings: slot features summed, mean over the stack
  const double slotScale = 1.0 / stackLen;
  for (int e = 0; e < n; ++e) {
    double* xe = C.x0.data() + static_cast<size_t>(e) * d;
    for (const NodeFeatures& s : window.entries[e].slots) {
      const int occ = std::clamp(s.occupancy, 0, 255);
      const int lvl = std::clamp(s.level, 0, cfg.maxLevels - 1);
      const int oct = std::clamp(s.octant, 0, 7);
      const double* eo = P.data() + lay.occEmb + static_cast<size_t>(occ) * d;
      const double* el = P.data() + lay.levelEmb + static_cast<size_t>(lvl) * d;
      const double* ec = P.data() + lay.octEmb + static_cast<size_t>(oct) * d;
      const double cellSpan = std::exp2(s.level);
      const double px = s.position.x / cellSpan;
      const double py = s.position.y / cellSpan;
      const double pz = s.position.z / cellSpan;
      const double* pp = P.data() + lay.posProj;
      for (int i = 0; i < d; ++i)
        xe[i] += slotScale * (eo[i] + el[i] + ec[i] + px * pp[i] + py * pp[d + i] + pz * pp[2 * d + i]);
    }
  }

  C.blocks.resize(cfg.layers);
  std::vector<double> x = C.x0;

  const double invSqrtHd = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<double> scores(n);

  for (int bi = 0; bi < cfg.layers; ++bi) {
    const auto& B = lay.blocks[bi];
    BlockCache& bc = C.blocks[bi];
    bc.xin = x;
    bc.aHat.assign(nd, 0.0);
    bc.a.assign(nd, 0.0);
    bc.ln1Inv.assign(n, 0.0);
    layerNormForward(bc.xin, n, d, weights.at(B.ln1g, d), weights.at(B.ln1b, d), bc.aHat, bc.a,
                     bc.ln1Inv);

    bc.q.assign(nd, 0.0);
    bc.k.assign(nd, 0.0);
    bc.v.assign(nd, 0.0);
    linearForward(bc.a, n, d, weights.at(B.wq, static_cast<size_t>(d) * d), nullptr, d, bc.q);
    linearForward(bc.a, n, d, weights.at(B.wk, static_cast<size_t>(d) * d), nullptr, d, bc.k);
    linearForward(bc.a, n, d, weights.at(B.wv, static_cast<size_t>(d) * d), nullptr, d, bc.v);

    // rotary position by window rank, per head slice
    for (int r = 0; r < n; ++r) {
      for (int h = 0; h < nh; ++h) {
        applyRope(bc.q.data() + static_cast<size_t>(r) * d + h * hd, hd, r, false);
        applyRope(bc.k.data() + static_cast<size_t>(r) * d + h * hd, hd, r, false);
      }
    }

    if (cache) bc.probs.assign(static_cast<size_t>(nh) * n * n, 0.0);
    bc.ctx.assign(nd, 0.0);
    for (int h = 0; h < nh; ++h) {
      for (int i = 0; i < n; ++i) {
        const double* qi = bc.q.data() + static_cast<size_t>(i) * d + h * hd;
        double maxScore = -1e300;
        for (int j = 0; j <= i; ++j) {  // causal: row i sees entries <= i
          const double* kj = bc.k.data() + static_cast<size_t>(j) * d + h * hd;
          double s = 0.0;
          for (int t = 0; t < hd; ++t) s += qi[t] * kj[t];
          s *= invSqrtHd;
          scores[j] = s;
          maxScore = std::max(maxScore, s);
        }
        double z = 0.0;
        for (int j = 0; j <= i; ++j) {
          scores[j] = std::exp(scores[j] - maxScore);
          z += scores[j];
        }
        double* ci = bc.ctx.data() + static_cast<size_t>(i) * d + h * hd;
        for (int j = 0; j <= i; ++j) {
          const double p = scores[j] / z;
          if (cache)
            bc.probs[(static_cast<size_t>(h) * n + i) * n + j] = p;
          const double* vj = bc.v.data() + static_cast<size_t>(j) * d + h * hd;
          for (int t = 0; t < hd; ++t) ci[t] += p * vj[t];
        }
      }
    }

    bc.x1.assign(nd, 0.0);
    linearForward(bc.ctx, n, d, weights.at(B.wo, static_cast<size_t>(d) * d), nullptr, d, bc.x1);
    for (size_t i = 0; i < nd; ++i) bc.x1[i] += bc.xin[i];

    bc.bHat.assign(nd, 0.0);
    bc.b.assign(nd, 0.0);
    bc.ln2Inv.assign(n, 0.0);
    layerNormForward(bc.x1, n, d, weights.at(B.ln2g, d), weights.at(B.ln2b, d), bc.bHat, bc.b,
                     bc.ln2Inv);

    bc.z1.assign(static_cast<size_t>(n) * ff, 0.0);
    linearForward(bc.b, n, d, weights.at(B.w1, static_cast<size_t>(ff) * d),
                  P.data() + B.b1, ff, bc.z1);
    bc.h = bc.z1;
    for (double& v : bc.h) v = v > 0.0 ? v : 0.0;

    x.assign(nd, 0.0);
    linearForward(bc.h, n, ff, weights.at(B.w2, static_cast<size_t>(d) * ff),
                  P.data() + B.b2, d, x);
    for (size_t i = 0; i < nd; ++i) x[i] += bc.x1[i];
  }

  C.xF = x;
  C.yHat.assign(nd, 0.0);
  C.y.assign(nd, 0.0);
  C.lnFInv.assign(n, 0.0);
  layerNormForward(C.xF, n, d, weights.at(lay.lnFg, d), weights.at(lay.lnFb, d), C.yHat, C.y,
                   C.lnFInv);

  size_t headW;
  size_t headB;
  switch (head) {
    case Head::NonLeaf: headW = lay.headNL; headB = lay.headNLb; break;
    case Head::LeafBit: headW = lay.headLB; headB = lay.headLBb; break;
    case Head::LeafPredict: headW = lay.headLP; headB = lay.headLPb; break;
    default: throw ConfigError("forward: unknown head");
  }
  C.logits.assign(static_cast<size_t>(n) * K, 0.0);
  linearForward(C.y, n, d, weights.at(headW, static_cast<size_t>(K) * d), P.data() + headB, K,
                C.logits);

  std::vector<std::vector<double>> rows(n, std::vector<double>(K));
  for (int r = 0; r < n; ++r) {
    const double* lr = C.logits.data() + static_cast<size_t>(r) * K;
    auto& row = rows[r];
    if (head == Head::LeafPredict) {
      for (int i = 0; i < K; ++i) row[i] = 1.0 / (1.0 + std::exp(-lr[i]));
    } else {
      double mx = lr[0];
      for (int i = 1; i < K; ++i) mx = std::max(mx, lr[i]);
      double z = 0.0;
      for (int i = 0; i < K; ++i) {
        row[i] = std::exp(lr[i] - mx);
        z += row[i];
      }
      for (int i = 0; i < K; ++i) row[i] /= z;
    }
  }
  return rows;
}

}  // namespace detail

std::vector<std::vector<double>> forward(const ModelWeights& weights, const ContextWindow& window,
                                         Head head) {
  return detail::forwardImpl(weights, window, head, nullptr);
}

void saveCheckpoint(const ModelWeights& weights, const std::string& path) {
  std::vector<uint8_t> blob = weights.serialize();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OlcError(path + ": cannot open for writing");
  f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!f) throw OlcError(path + ": write failed");
}

ModelWeights loadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw OlcError(path + ": cannot open checkpoint");
  std::vector<uint8_t> blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (blob.size() < 40) throw CorruptionError(path + ": checkpoint too short");
  if (std::memcmp(blob.data(), "OLCW", 4) != 0)
    throw CorruptionError(path + ": bad checkpoint magic");

  uint64_t stored;
  std::memcpy(&stored, blob.data() + blob.size() - 8, 8);
  uint64_t computed = fnv1a64({blob.data(), blob.size() - 8});
  if (stored != computed) throw ChecksumMismatchError(path + ": checkpoint checksum mismatch");

  size_t off = 4;
  auto getU8 = [&] { return blob[off++]; };
  auto getU32 = [&] {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(blob[off++]) << (8 * i);
    return v;
  };
  auto getU64 = [&] {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(blob[off++]) << (8 * i);
    return v;
  };
  uint8_t version = getU8();
  if (version != 1) throw CorruptionError(path + ": unsupported checkpoint version");
  ModelConfig cfg;
  cfg.layers = getU8();
  cfg.heads = getU8();
  cfg.ancestorLevels = getU8();
  cfg.dim = static_cast<int>(getU32());
  cfg.maxLevels = static_cast<int>(getU32());
  cfg.coderWindow = static_cast<int>(getU32());
  cfg.predictorWindow = static_cast<int>(getU32());
  uint64_t count = getU64();

  ModelWeights w(cfg, 0);
  if (count != w.params().size()) throw CorruptionError(path + ": parameter count mismatch");
  if (blob.size() != off + count * 4 + 8) throw CorruptionError(path + ": checkpoint size mismatch");
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t bits = 0;
    std::memcpy(&bits, blob.data() + off + i * 4, 4);
    float fv;
    std::memcpy(&fv, &bits, 4);
    if (!std::isfinite(fv)) throw CorruptionError(path + ": non-finite parameter");
    w.params()[i] = fv;
  }
  return w;
}

}  // namespace olc
