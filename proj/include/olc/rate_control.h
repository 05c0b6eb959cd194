// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_RATE_CONTROL_H
#define OLC_RATE_CONTROL_H

#include <functional>
#include <string>

#include "olc/bitstream.h"

namespace olc {

// Calibration anchor at an integer truncating depth. qs values are in the
// normalized [-1,1]^3 frame (extent 2), so one table serves every cloud.
struct RateAnchor {
  int depth = 0;
  double qs = 0.0;
  double bpp = 0.0;
};

struct RateAnchorTable {
  std::vector<RateAnchor> anchors;  // sorted by depth; bpp increasing, qs decreasing
  uint64_t modelChecksum = 0;
  std::string dataset;

  void validate() const;
  // bracketing anchor pair for a target rate (binary search)
  std::pair<const RateAnchor*, const RateAnchor*> bracket(double bppTarget) const;
};

// Runs the codec at each integer depth over the dataset; records the mean
// bpp (or per-cloud rows when perCloud is set, one table entry per depth
// still using the mean). Depths must be contiguous.
RateAnchorTable calibrate(const std::vector<PointCloud>& dataset, const ModelWeights* model,
                          int depthLo, int depthHi, int jobs = 1);

// Linear interpolation of qs between two anchors at the target rate.
double qsForTarget(double bppTarget, const RateAnchor& lo, const RateAnchor& hi);

struct RcResult {
  Bitstream stream;
  double qs = 0.0;           // normalized-frame qs actually used
  double achievedBpp = 0.0;
  double bitError = 0.0;
};

// Picks the bracketing anchors, interpolates qs, encodes, reports the rate
// error. The model is never modified.
RcResult rcEncode(const PointCloud& pc, double bppTarget, const RateAnchorTable& table,
                  const ModelWeights* model);

// Encodes at nSamples interior qs values between the two anchors and fits a
// line bpp(qs); returns max |residual| / (anchor bpp range). The encode
// function is injectable for testing; the default runs the real codec.
double bppQsLinearityCheck(const std::vector<PointCloud>& dataset, const ModelWeights* model,
                           const RateAnchor& lo, const RateAnchor& hi, int nSamples,
                           const std::function<double(const PointCloud&, double)>& bppAt = {});

// CSV: `depth,qs,bpp` rows with a comment header naming model and dataset.
void writeAnchorCsv(const std::string& path, const RateAnchorTable& table);
RateAnchorTable readAnchorCsv(const std::string& path);

// Normalized-frame qs -> raw-frame qs for one cloud.
double rawQsFromNormalized(const PointCloud& pc, double normalizedQs);

}  // namespace olc

#endif
