// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_TRAINER_H
#define OLC_TRAINER_H

#include <span>
#include <vector>

#include "olc/context_model.h"

namespace olc {

struct TrainHyper {
  double lr = 2e-4;
  int epochs = 10;
  int window = 1024;   // context window length for training samples
  uint64_t seed = 1;
  // s used by the predictor loss; -1 samples s uniformly in [0,7] per window
  // so one model serves every step count at decode time.
  int predictorSteps = -1;
};

struct EpochLog {
  int epoch = 0;
  double meanLoss = 0.0;
};

// Mean binary cross entropy over the 8-s lossy-phase bits of one node,
// on raw logits through the logistic function. steps = s in [0,8).
double bceLoss(std::span<const double> logits, std::span<const int> targets, int steps);

// d(bceLoss)/d(logit_j) = (sigmoid(logit_j) - target_j) / (8 - steps).
std::vector<double> bceLossGrad(std::span<const double> logits, std::span<const int> targets,
                                int steps);

// Trains one head (and the shared backbone) on octree sequences with Adam.
// Cross entropy drives the coding heads, the lossy-phase loss drives the
// predictor head. Per-epoch mean loss is appended to `log`; a non-finite
// loss aborts with TrainError.
ModelWeights train(ModelWeights weights, const std::vector<Octree>& dataset, Head head,
                   const TrainHyper& hyper, std::vector<EpochLog>* log = nullptr);

}  // namespace olc

#endif
