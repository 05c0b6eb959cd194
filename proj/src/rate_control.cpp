// SPDX-License-Identifier: Apache-2.0

#include "olc/rate_control.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "olc/metrics.h"
#include "olc/thread_pool.h"

namespace olc {

void RateAnchorTable::validate() const {
  if (anchors.size() < 2) throw DomainError("rate anchor table needs at least 2 anchors");
  for (size_t i = 1; i < anchors.size(); ++i) {
    if (anchors[i].depth != anchors[i - 1].depth + 1)
      throw DomainError("rate anchor depths must be contiguous");
    if (!(anchors[i].bpp > anchors[i - 1].bpp))
      throw DomainError("rate anchor bpp must increase with depth");
    if (!(anchors[i].qs < anchors[i - 1].qs))
      throw DomainError("rate anchor qs must decrease with depth");
  }
}

std::pair<const RateAnchor*, const RateAnchor*> RateAnchorTable::bracket(double bppTarget) const {
  validate();
  if (bppTarget < anchors.front().bpp || bppTarget > anchors.back().bpp)
    throw DomainError("target bpp outside the calibrated range");
  size_t lo = 0, hi = anchors.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (anchors[mid].bpp <= bppTarget) lo = mid;
    else hi = mid;
  }
  return {&anchors[lo], &anchors[lo + 1]};
}

double rawQsFromNormalized(const PointCloud& pc, double normalizedQs) {
  const double extent = pc.maxExtent();
  if (!(extent > 0.0)) throw DomainError("rawQsFromNormalized: degenerate extent");
  // quantizing the normalized cloud at qs_n is identical to quantizing the
  // raw cloud at qs_n * extent / 2, origin at bboxMin
  return normalizedQs * extent / 2.0;
}

namespace {

double encodeBpp(const PointCloud& pc, const ModelWeights* model, double normalizedQs) {
  CodecConfig cfg;
  cfg.qs = rawQsFromNormalized(pc, normalizedQs);
  cfg.steps = 8;
  cfg.model = model;
  return encode(pc, cfg).bpp;
}

}  // namespace

RateAnchorTable calibrate(const std::vector<PointCloud>& dataset, const ModelWeights* model,
                          int depthLo, int depthHi, int jobs) {
  if (dataset.empty()) throw DomainError("calibrate: empty dataset");
  if (depthHi < depthLo + 1) throw DomainError("calibrate: need at least two contiguous depths");

  RateAnchorTable table;
  table.modelChecksum = model ? model->checksum() : 0;
  for (int depth = depthLo; depth <= depthHi; ++depth) {
    const double qsNorm = computeQs(2.0, depth);
    std::vector<double> bpp(dataset.size());
    parallelFor(dataset.size(), jobs,
                [&](size_t i) { bpp[i] = encodeBpp(dataset[i], model, qsNorm); });
    double mean = 0.0;
    for (double b : bpp) mean += b;
    mean /= static_cast<double>(bpp.size());
    table.anchors.push_back({depth, qsNorm, mean});
  }
  table.validate();
  return table;
}

double qsForTarget(double bppTarget, const RateAnchor& lo, const RateAnchor& hi) {
  if (!(hi.bpp > lo.bpp)) throw DomainError("qsForTarget: degenerate anchor pair");
  if (bppTarget < lo.bpp || bppTarget > hi.bpp)
    throw DomainError("qsForTarget: target bpp outside the anchor pair");
  return (bppTarget - lo.bpp) / (hi.bpp - lo.bpp) * (hi.qs - lo.qs) + lo.qs;
}

RcResult rcEncode(const PointCloud& pc, double bppTarget, const RateAnchorTable& table,
                  const ModelWeights* model) {
  auto [lo, hi] = table.bracket(bppTarget);

  RcResult res;
  res.qs = bppTarget == lo->bpp ? lo->qs
         : bppTarget == hi->bpp ? hi->qs
                                : qsForTarget(bppTarget, *lo, *hi);

  CodecConfig cfg;
  cfg.qs = rawQsFromNormalized(pc, res.qs);
  cfg.steps = 8;
  cfg.model = model;
  EncodeResult enc = encode(pc, cfg);
  res.achievedBpp = enc.bpp;
  res.bitError = bitError(bppTarget, enc.bpp);
  res.stream = std::move(enc.stream);
  return res;
}

double bppQsLinearityCheck(const std::vector<PointCloud>& dataset, const ModelWeights* model,
                           const RateAnchor& lo, const RateAnchor& hi, int nSamples,
                           const std::function<double(const PointCloud&, double)>& bppAt) {
  if (nSamples < 2) throw DomainError("linearity check needs at least 2 interior samples");
  if (dataset.empty()) throw DomainError("linearity check: empty dataset");
  const double bppRange = hi.bpp - lo.bpp;
  if (!(std::abs(bppRange) > 0.0)) throw DomainError("linearity check: zero bpp range");

  auto meanBpp = [&](double qsNorm) {
    double acc = 0.0;
    for (const auto& pc : dataset)
      acc += bppAt ? bppAt(pc, qsNorm) : encodeBpp(pc, model, qsNorm);
    return acc / static_cast<double>(dataset.size());
  };

  // anchors plus evenly spaced interior qs samples
  std::vector<std::pair<double, double>> pts;  // (qs, bpp)
  pts.emplace_back(lo.qs, lo.bpp);
  for (int i = 1; i <= nSamples; ++i) {
    const double qs = lo.qs + (hi.qs - lo.qs) * i / (nSamples + 1.0);
    pts.emplace_back(qs, meanBpp(qs));
  }
  pts.emplace_back(hi.qs, hi.bpp);

  // least-squares line bpp(qs)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw DomainError("linearity check: degenerate qs samples");
  const double slope = (n * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / n;

  double maxResidual = 0.0;
  for (auto [x, y] : pts) maxResidual = std::max(maxResidual, std::abs(y - (slope * x + icept)));
  return maxResidual / std::abs(bppRange);
}

void writeAnchorCsv(const std::string& path, const RateAnchorTable& table) {
  std::ofstream f(path);
  if (!f) throw OlcError(path + ": cannot open for writing");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "# model=%016llx dataset=%s\n",
                static_cast<unsigned long long>(table.modelChecksum), table.dataset.c_str());
  f << buf << "depth,qs,bpp\n";
  for (const auto& a : table.anchors) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", a.depth, a.qs, a.bpp);
    f << buf;
  }
}

RateAnchorTable readAnchorCsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw OlcError(path + ": cannot open");
  RateAnchorTable table;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto mpos = line.find("model=");
      if (mpos != std::string::npos)
        table.modelChecksum = std::strtoull(line.c_str() + mpos + 6, nullptr, 16);
      auto dpos = line.find("dataset=");
      if (dpos != std::string::npos) table.dataset = line.substr(dpos + 8);
      continue;
    }
    if (line.rfind("depth,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string field;
    RateAnchor a;
    std::getline(ls, field, ',');
    a.depth = std::atoi(field.c_str());
    std::getline(ls, field, ',');
    a.qs = std::strtod(field.c_str(), nullptr);
    std::getline(ls, field, ',');
    a.bpp = std::strtod(field.c_str(), nullptr);
    table.anchors.push_back(a);
  }
  table.validate();
  return table;
}

}  // namespace olc
