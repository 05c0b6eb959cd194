// SPDX-License-Identifier: Apache-2.0

// Internal model plumbing shared by the forward path and the trainer.
// Not installed; include only from src/.

#ifndef OLC_MODEL_DETAIL_H
#define OLC_MODEL_DETAIL_H

#include <cmath>
#include <span>
#include <vector>

#include "olc/context_model.h"

namespace olc::detail {

constexpr double kLnEps = 1e-5;

// y[n x out] = x[n x in] * W^T + bias, W row-major (out x in)
inline void linearForward(std::span<const double> x, int n, int in, std::span<const double> w,
                          const double* bias, int out, std::span<double> y) {
  for (int r = 0; r < n; ++r) {
    const double* xr = x.data() + static_cast<size_t>(r) * in;
    double* yr = y.data() + static_cast<size_t>(r) * out;
    for (int o = 0; o < out; ++o) {
      const double* wo = w.data() + static_cast<size_t>(o) * in;
      double acc = bias ? bias[o] : 0.0;
      for (int i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
}

inline void linearBackward(std::span<const double> x, int n, int in, std::span<const double> w,
                           int out, std::span<const double> dy, std::span<double> dx,
                           std::span<double> dw, double* dBias) {
  for (int r = 0; r < n; ++r) {
    const double* xr = x.data() + static_cast<size_t>(r) * in;
    const double* dyr = dy.data() + static_cast<size_t>(r) * out;
    double* dxr = dx.empty() ? nullptr : dx.data() + static_cast<size_t>(r) * in;
    for (int o = 0; o < out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      const double* wo = w.data() + static_cast<size_t>(o) * in;
      double* dwo = dw.data() + static_cast<size_t>(o) * in;
      if (dBias) dBias[o] += g;
      for (int i = 0; i < in; ++i) {
        dwo[i] += g * xr[i];
        if (dxr) dxr[i] += g * wo[i];
      }
    }
  }
}

inline void layerNormForward(std::span<const double> x, int n, int d, std::span<const double> gamma,
                             std::span<const double> beta, std::span<double> xhat,
                             std::span<double> y, std::span<double> invStd) {
  for (int r = 0; r < n; ++r) {
    const double* xr = x.data() + static_cast<size_t>(r) * d;
    double m = 0.0;
    for (int i = 0; i < d; ++i) m += xr[i];
    m /= d;
    double v = 0.0;
    for (int i = 0; i < d; ++i) {
      double c = xr[i] - m;
      v += c * c;
    }
    v /= d;
    double inv = 1.0 / std::sqrt(v + kLnEps);
    invStd[r] = inv;
    double* hr = xhat.data() + static_cast<size_t>(r) * d;
    double* yr = y.data() + static_cast<size_t>(r) * d;
    for (int i = 0; i < d; ++i) {
      hr[i] = (xr[i] - m) * inv;
      yr[i] = gamma[i] * hr[i] + beta[i];
    }
  }
}

inline void layerNormBackward(std::span<const double> xhat, int n, int d,
                              std::span<const double> gamma, std::span<const double> invStd,
                              std::span<const double> dy, std::span<double> dx,
                              std::span<double> dGamma, std::span<double> dBeta) {
  for (int r = 0; r < n; ++r) {
    const double* hr = xhat.data() + static_cast<size_t>(r) * d;
    const double* dyr = dy.data() + static_cast<size_t>(r) * d;
    double* dxr = dx.data() + static_cast<size_t>(r) * d;
    double sumDh = 0.0, sumDhH = 0.0;
    for (int i = 0; i < d; ++i) {
      double dh = dyr[i] * gamma[i];
      sumDh += dh;
      sumDhH += dh * hr[i];
      dGamma[i] += dyr[i] * hr[i];
      dBeta[i] += dyr[i];
    }
    const double mDh = sumDh / d;
    const double mDhH = sumDhH / d;
    for (int i = 0; i < d; ++i) {
      double dh = dyr[i] * gamma[i];
      dxr[i] += invStd[r] * (dh - mDh - hr[i] * mDhH);
    }
  }
}

// In-place rotary embedding over one head slice; inverse = rotate back.
inline void applyRope(double* v, int headDim, int pos, bool inverse) {
  for (int k = 0; k * 2 < headDim; ++k) {
    double theta = pos * std::pow(10000.0, -2.0 * k / headDim);
    if (inverse) theta = -theta;
    double c = std::cos(theta), s = std::sin(theta);
    double a = v[2 * k], b = v[2 * k + 1];
    v[2 * k] = a * c - b * s;
    v[2 * k + 1] = a * s + b * c;
  }
}

struct BlockCache {
  std::vector<double> xin;            // n*d block input
  std::vector<double> aHat, a;        // LN1 normalized / affine output
  std::vector<double> ln1Inv;         // n
  std::vector<double> q, k, v;        // n*d, q/k post-rotation
  std::vector<double> probs;          // heads*n*n attention rows (training only)
  std::vector<double> ctx;            // n*d concatenated head context
  std::vector<double> x1;             // n*d after attention residual
  std::vector<double> bHat, b;        // LN2
  std::vector<double> ln2Inv;         // n
  std::vector<double> z1, h;          // n*ff pre-activation / relu
};

struct ForwardCache {
  int n = 0;
  Head head = Head::NonLeaf;
  std::vector<double> x0;  // n*d embedding output
  std::vector<BlockCache> blocks;
  std::vector<double> xF;       // n*d residual stream entering the final LN
  std::vector<double> yHat, y;  // final LN
  std::vector<double> lnFInv;
  std::vector<double> logits;  // n*K
};

// Single forward path used by inference and training; `cache` non-null keeps
// what backward needs (including attention probabilities).
std::vector<std::vector<double>> forwardImpl(const ModelWeights& weights,
                                             const ContextWindow& window, Head head,
                                             ForwardCache* cache);

// Accumulates parameter gradients for d(loss)/d(logits); needs the cache of
// the matching forwardImpl call.
void backward(const ModelWeights& weights, const ContextWindow& window, const ForwardCache& cache,
              std::span<const double> dLogits, std::vector<double>& grads);

}  // namespace olc::detail

#endif
