// SPDX-License-Identifier: Apache-2.0

#include "olc/trainer.h"

#include <algorithm>
#include <cmath>

#include "model_detail.h"

namespace olc {

namespace detail {

void backward(const ModelWeights& weights, const ContextWindow& window, const ForwardCache& C,
              std::span<const double> dLogits, std::vector<double>& grads) {
  const ModelConfig& cfg = weights.config();
  const ParamLayout& lay = weights.layout();
  const int n = C.n;
  const int d = cfg.dim;
  const int ff = cfg.ffDim();
  const int nh = cfg.heads;
  const int hd = cfg.headDim();
  const int K = headWidth(C.head);
  const size_t nd = static_cast<size_t>(n) * d;
  if (grads.size() != lay.total) grads.assign(lay.total, 0.0);

  size_t headW, headB;
  switch (C.head) {
    case Head::NonLeaf: headW = lay.headNL; headB = lay.headNLb; break;
    case Head::LeafBit: headW = lay.headLB; headB = lay.headLBb; break;
    default: headW = lay.headLP; headB = lay.headLPb; break;
  }

  std::vector<double> dY(nd, 0.0);
  linearBackward(C.y, n, d, weights.at(headW, static_cast<size_t>(K) * d), K, dLogits, dY,
                 {grads.data() + headW, static_cast<size_t>(K) * d}, grads.data() + headB);

  std::vector<double> dX(nd, 0.0);
  layerNormBackward(C.yHat, n, d, weights.at(lay.lnFg, d), C.lnFInv, dY, dX,
                    {grads.data() + lay.lnFg, static_cast<size_t>(d)},
                    {grads.data() + lay.lnFb, static_cast<size_t>(d)});

  const double invSqrtHd = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<double> dH(static_cast<size_t>(n) * ff);
  std::vector<double> dB(nd), dX1(nd), dCtx(nd), dQ(nd), dKv(nd), dV(nd), dA(nd);
  std::vector<double> dp(n), ds(n);

  for (int bi = cfg.layers - 1; bi >= 0; --bi) {
    const auto& B = lay.blocks[bi];
    const BlockCache& bc = C.blocks[bi];

    // x_out = x1 + W2 relu(W1 b + b1) + b2
    std::fill(dH.begin(), dH.end(), 0.0);
    linearBackward(bc.h, n, ff, weights.at(B.w2, static_cast<size_t>(d) * ff), d, dX, dH,
                   {grads.data() + B.w2, static_cast<size_t>(d) * ff}, grads.data() + B.b2);
    for (size_t i = 0; i < dH.size(); ++i)
      if (bc.z1[i] <= 0.0) dH[i] = 0.0;

    std::fill(dB.begin(), dB.end(), 0.0);
    linearBackward(bc.b, n, d, weights.at(B.w1, static_cast<size_t>(ff) * d), ff, dH, dB,
                   {grads.data() + B.w1, static_cast<size_t>(ff) * d}, grads.data() + B.b1);

    dX1 = dX;  // residual branch
    layerNormBackward(bc.bHat, n, d, weights.at(B.ln2g, d), bc.ln2Inv, dB, dX1,
                      {grads.data() + B.ln2g, static_cast<size_t>(d)},
                      {grads.data() + B.ln2b, static_cast<size_t>(d)});

    // x1 = xin + Wo ctx
    std::fill(dCtx.begin(), dCtx.end(), 0.0);
    linearBackward(bc.ctx, n, d, weights.at(B.wo, static_cast<size_t>(d) * d), d, dX1, dCtx,
                   {grads.data() + B.wo, static_cast<size_t>(d) * d}, nullptr);

    std::fill(dQ.begin(), dQ.end(), 0.0);
    std::fill(dKv.begin(), dKv.end(), 0.0);
    std::fill(dV.begin(), dV.end(), 0.0);
    for (int h = 0; h < nh; ++h) {
      for (int i = 0; i < n; ++i) {
        const double* probRow = bc.probs.data() + (static_cast<size_t>(h) * n + i) * n;
        const double* dCtxI = dCtx.data() + static_cast<size_t>(i) * d + h * hd;
        double dpDot = 0.0;
        for (int j = 0; j <= i; ++j) {
          const double* vj = bc.v.data() + static_cast<size_t>(j) * d + h * hd;
          double* dvj = dV.data() + static_cast<size_t>(j) * d + h * hd;
          double acc = 0.0;
          for (int t = 0; t < hd; ++t) {
            dvj[t] += probRow[j] * dCtxI[t];
            acc += dCtxI[t] * vj[t];
          }
          dp[j] = acc;
          dpDot += probRow[j] * acc;
        }
        for (int j = 0; j <= i; ++j) ds[j] = probRow[j] * (dp[j] - dpDot);
        double* dqi = dQ.data() + static_cast<size_t>(i) * d + h * hd;
        const double* qi = bc.q.data() + static_cast<size_t>(i) * d + h * hd;
        for (int j = 0; j <= i; ++j) {
          const double w = ds[j] * invSqrtHd;
          if (w == 0.0) continue;
          const double* kj = bc.k.data() + static_cast<size_t>(j) * d + h * hd;
          double* dkj = dKv.data() + static_cast<size_t>(j) * d + h * hd;
          for (int t = 0; t < hd; ++t) {
            dqi[t] += w * kj[t];
            dkj[t] += w * qi[t];
          }
        }
      }
    }
    // rotations are orthogonal: grad through RoPE = inverse rotation
    for (int r = 0; r < n; ++r) {
      for (int h = 0; h < nh; ++h) {
        applyRope(dQ.data() + static_cast<size_t>(r) * d + h * hd, hd, r, true);
        applyRope(dKv.data() + static_cast<size_t>(r) * d + h * hd, hd, r, true);
      }
    }

    std::fill(dA.begin(), dA.end(), 0.0);
    linearBackward(bc.a, n, d, weights.at(B.wq, static_cast<size_t>(d) * d), d, dQ, dA,
                   {grads.data() + B.wq, static_cast<size_t>(d) * d}, nullptr);
    linearBackward(bc.a, n, d, weights.at(B.wk, static_cast<size_t>(d) * d), d, dKv, dA,
                   {grads.data() + B.wk, static_cast<size_t>(d) * d}, nullptr);
    linearBackward(bc.a, n, d, weights.at(B.wv, static_cast<size_t>(d) * d), d, dV, dA,
                   {grads.data() + B.wv, static_cast<size_t>(d) * d}, nullptr);

    // dX1 doubles as the residual gradient into xin
    layerNormBackward(bc.aHat, n, d, weights.at(B.ln1g, d), bc.ln1Inv, dA, dX1,
                      {grads.data() + B.ln1g, static_cast<size_t>(d)},
                      {grads.data() + B.ln1b, static_cast<size_t>(d)});
    dX = dX1;
  }

  // embedding scatter
  const int stackLen = cfg.ancestorLevels + 1;
  const double slotScale = 1.0 / stackLen;
  for (int e = 0; e < n; ++e) {
    const double* dxe = dX.data() + static_cast<size_t>(e) * d;
    for (const NodeFeatures& s : window.entries[e].slots) {
      const int occ = std::clamp(s.occupancy, 0, 255);
      const int lvl = std::clamp(s.level, 0, cfg.maxLevels - 1);
      const int oct = std::clamp(s.octant, 0, 7);
      double* go = grads.data() + lay.occEmb + static_cast<size_t>(occ) * d;
      double* gl = grads.data() + lay.levelEmb + static_cast<size_t>(lvl) * d;
      double* gc = grads.data() + lay.octEmb + static_cast<size_t>(oct) * d;
      double* gp = grads.data() + lay.posProj;
      const double cellSpan = std::exp2(s.level);
      const double px = s.position.x / cellSpan;
      const double py = s.position.y / cellSpan;
      const double pz = s.position.z / cellSpan;
      for (int i = 0; i < d; ++i) {
        const double g = slotScale * dxe[i];
        go[i] += g;
        gl[i] += g;
        gc[i] += g;
        gp[i] += px * g;
        gp[d + i] += py * g;
        gp[2 * d + i] += pz * g;
      }
    }
  }
}

}  // namespace detail

double bceLoss(std::span<const double> logits, std::span<const int> targets, int steps) {
  if (steps < 0 || steps >= 8) throw DomainError("bceLoss: steps must be in [0,8)");
  const size_t m = static_cast<size_t>(8 - steps);
  if (logits.size() != m || targets.size() != m)
    throw DomainError("bceLoss: expected 8-steps logits/targets");
  double loss = 0.0;
  for (size_t j = 0; j < m; ++j) {
    if (targets[j] != 0 && targets[j] != 1) throw DomainError("bceLoss: targets must be binary");
    const double b = logits[j];
    // log(1+e^-b) + (1-y)·b, rearranged for large |b|
    const double softplusNeg = b > 0 ? std::log1p(std::exp(-b)) : -b + std::log1p(std::exp(b));
    loss += softplusNeg + (1.0 - targets[j]) * b;
  }
  return loss / static_cast<double>(m);
}

std::vector<double> bceLossGrad(std::span<const double> logits, std::span<const int> targets,
                                int steps) {
  if (steps < 0 || steps >= 8) throw DomainError("bceLossGrad: steps must be in [0,8)");
  const size_t m = static_cast<size_t>(8 - steps);
  if (logits.size() != m || targets.size() != m)
    throw DomainError("bceLossGrad: expected 8-steps logits/targets");
  std::vector<double> grad(m);
  for (size_t j = 0; j < m; ++j) {
    const double sig = 1.0 / (1.0 + std::exp(-logits[j]));
    grad[j] = (sig - targets[j]) / static_cast<double>(m);
  }
  return grad;
}

namespace {

struct TrainingWindow {
  ContextWindow window;
  std::vector<int> targets;                    // coding heads; class per entry
  std::vector<std::array<int, 8>> bits;        // predictor ground truth
  int steps = 0;                               // predictor: s (planes 0..s-1 revealed)
};

// Chunks one octree level into training windows matching how the codec
// builds its own windows.
void appendNonLeafWindows(const Octree& tree, int level, int D, int cap,
                          std::vector<TrainingWindow>& out) {
  const auto& nodes = tree.levels[level];
  for (size_t base = 0; base < nodes.size(); base += cap) {
    const size_t end = std::min(nodes.size(), base + cap);
    TrainingWindow tw;
    for (size_t i = base; i < end; ++i) {
      tw.window.entries.push_back(buildStack(tree.levels, level, i, D, 0));
      tw.targets.push_back(tree.levels[level][i].occupancy - 1);
    }
    out.push_back(std::move(tw));
  }
}

int partialOccupancy(uint8_t occ, int planes) {
  return occ & ((1u << planes) - 1u);
}

void appendLeafBitWindows(const Octree& tree, int D, int cap, std::vector<TrainingWindow>& out) {
  const int leafLevel = tree.depth - 1;
  const auto& nodes = tree.levels[leafLevel];
  for (size_t base = 0; base < nodes.size(); base += cap) {
    const size_t end = std::min(nodes.size(), base + cap);
    for (int plane = 0; plane < 8; ++plane) {
      TrainingWindow tw;
      for (size_t i = base; i < end; ++i) {
        const uint8_t occ = nodes[i].occupancy;
        tw.window.entries.push_back(
          buildStack(tree.levels, leafLevel, i, D, partialOccupancy(occ, plane)));
        tw.targets.push_back((occ >> plane) & 1);
      }
      out.push_back(std::move(tw));
    }
  }
}

void appendPredictorWindows(const Octree& tree, int D, int cap, int fixedSteps, Rng& rng,
                            std::vector<TrainingWindow>& out) {
  const int leafLevel = tree.depth - 1;
  const auto& nodes = tree.levels[leafLevel];
  for (size_t base = 0; base < nodes.size(); base += cap) {
    const size_t end = std::min(nodes.size(), base + cap);
    TrainingWindow tw;
    tw.steps = fixedSteps >= 0 ? fixedSteps : static_cast<int>(rng.nextBelow(8));
    for (size_t i = base; i < end; ++i) {
      const uint8_t occ = nodes[i].occupancy;
      tw.window.entries.push_back(
        buildStack(tree.levels, leafLevel, i, D, partialOccupancy(occ, tw.steps)));
      std::array<int, 8> b{};
      for (int j = 0; j < 8; ++j) b[j] = (occ >> j) & 1;
      tw.bits.push_back(b);
    }
    out.push_back(std::move(tw));
  }
}

}  // namespace

ModelWeights train(ModelWeights weights, const std::vector<Octree>& dataset, Head head,
                   const TrainHyper& hyper, std::vector<EpochLog>* log) {
  if (dataset.empty()) throw TrainError("train: empty dataset");
  const ModelConfig& cfg = weights.config();
  const int D = cfg.ancestorLevels;
  const int K = headWidth(head);

  Rng rng(hyper.seed ^ 0x7472ull);
  std::vector<TrainingWindow> samples;
  for (const Octree& tree : dataset) {
    switch (head) {
      case Head::NonLeaf:
        for (int l = 0; l + 1 < tree.depth; ++l)
          appendNonLeafWindows(tree, l, D, hyper.window, samples);
        break;
      case Head::LeafBit:
        appendLeafBitWindows(tree, D, hyper.window, samples);
        break;
      case Head::LeafPredict:
        appendPredictorWindows(tree, D, hyper.window, hyper.predictorSteps, rng, samples);
        break;
    }
  }
  if (samples.empty())
    throw TrainError("train: dataset produced no training windows for this head");

  const size_t total = weights.layout().total;
  std::vector<double> grads(total, 0.0);
  std::vector<double> m(total, 0.0), v(total, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t step = 0;

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    // Fisher-Yates with the session RNG
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.nextBelow(i)]);

    double lossSum = 0.0;
    for (size_t oi : order) {
      const TrainingWindow& tw = samples[oi];
      const int n = static_cast<int>(tw.window.size());

      detail::ForwardCache cache;
      auto rows = detail::forwardImpl(weights, tw.window, head, &cache);

      std::vector<double> dLogits(static_cast<size_t>(n) * K, 0.0);
      double loss = 0.0;
      if (head == Head::LeafPredict) {
        const int planes = 8 - tw.steps;
        for (int r = 0; r < n; ++r) {
          std::vector<double> lg(planes);
          std::vector<int> tg(planes);
          for (int j = 0; j < planes; ++j) {
            lg[j] = cache.logits[static_cast<size_t>(r) * K + tw.steps + j];
            tg[j] = tw.bits[r][tw.steps + j];
          }
          loss += bceLoss(lg, tg, tw.steps);
          auto g = bceLossGrad(lg, tg, tw.steps);
          for (int j = 0; j < planes; ++j)
            dLogits[static_cast<size_t>(r) * K + tw.steps + j] = g[j] / n;
        }
        loss /= n;
      } else {
        for (int r = 0; r < n; ++r) {
          const int target = tw.targets[r];
          loss -= std::log(std::max(rows[r][target], 1e-300));
          for (int i = 0; i < K; ++i)
            dLogits[static_cast<size_t>(r) * K + i] = (rows[r][i] - (i == target ? 1.0 : 0.0)) / n;
        }
        loss /= n;
      }
      if (!std::isfinite(loss))
        throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch));
      lossSum += loss;

      std::fill(grads.begin(), grads.end(), 0.0);
      detail::backward(weights, tw.window, cache, dLogits, grads);

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto& params = weights.params();
      for (size_t i = 0; i < total; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        params[i] -= hyper.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      }
    }
    if (log) log->push_back({epoch, lossSum / static_cast<double>(samples.size())});
  }

  weights.canonicalize();
  return weights;
}

}  // namespace olc
