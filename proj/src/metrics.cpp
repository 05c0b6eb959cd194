// SPDX-License-Identifier: Apache-2.0

#include "olc/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "olc/kd_tree.h"

namespace olc {

namespace {

double psnrFromMse(double mse, double peak) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(3.0 * peak * peak / mse);
}

double directionalMse(const PointCloud& from, const KdTree& toTree) {
  double acc = 0.0;
  for (const auto& p : from.points) acc += toTree.nearest(p).second;
  return acc / static_cast<double>(from.size());
}

// Jacobi eigendecomposition of a symmetric 3x3; eigenvalues descending.
void symEigen3(const double m[3][3], double eval[3], double evec[3][3]) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];

  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < 3; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < 3; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < 3; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  int order[3] = {0, 1, 2};
  double d[3] = {a[0][0], a[1][1], a[2][2]};
  std::sort(order, order + 3, [&](int x, int y) { return d[x] > d[y]; });
  for (int i = 0; i < 3; ++i) {
    eval[i] = d[order[i]];
    for (int r = 0; r < 3; ++r) evec[r][i] = v[r][order[i]];
  }
}

// Unit normals per ref point by plane fit over self + k nearest neighbors.
// degenerate[i] set when the neighborhood is collinear or coincident.
std::vector<Vec3d> estimateNormals(const PointCloud& ref, const KdTree& refTree, int k,
                                   std::vector<bool>& degenerate) {
  std::vector<Vec3d> normals(ref.size(), {0, 0, 1});
  degenerate.assign(ref.size(), false);
  for (size_t i = 0; i < ref.size(); ++i) {
    auto nbrs = refTree.knn(ref.points[i], static_cast<size_t>(k) + 1);
    Vec3d c{0, 0, 0};
    for (size_t j : nbrs) c = c + ref.points[j];
    c = c / static_cast<double>(nbrs.size());
    double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (size_t j : nbrs) {
      Vec3d d = ref.points[j] - c;
      cov[0][0] += d.x * d.x; cov[0][1] += d.x * d.y; cov[0][2] += d.x * d.z;
      cov[1][1] += d.y * d.y; cov[1][2] += d.y * d.z; cov[2][2] += d.z * d.z;
    }
    cov[1][0] = cov[0][1]; cov[2][0] = cov[0][2]; cov[2][1] = cov[1][2];

    double eval[3], evec[3][3];
    symEigen3(cov, eval, evec);
    if (eval[0] <= 0.0 || eval[1] <= 1e-12 * eval[0]) {
      degenerate[i] = true;  // coincident or collinear neighborhood
      continue;
    }
    normals[i] = {evec[0][2], evec[1][2], evec[2][2]};  // smallest-eigenvalue direction
  }
  return normals;
}

}  // namespace

double d1Psnr(const PointCloud& ref, const PointCloud& test, double peak) {
  if (ref.empty() || test.empty()) throw DomainError("d1Psnr: empty cloud");
  KdTree refTree(ref.points), testTree(test.points);
  const double fwd = directionalMse(ref, testTree);
  const double bwd = directionalMse(test, refTree);
  return psnrFromMse(std::max(fwd, bwd), peak);
}

double d2Psnr(const PointCloud& ref, const PointCloud& test, double peak, int k,
              int* degenerateCount) {
  if (ref.empty() || test.empty()) throw DomainError("d2Psnr: empty cloud");
  if (static_cast<size_t>(k) + 1 > ref.size())
    throw DomainError("d2Psnr: ref needs at least k+1 points for normal estimation");
  KdTree refTree(ref.points), testTree(test.points);

  std::vector<bool> degenerate;
  std::vector<Vec3d> normals = estimateNormals(ref, refTree, k, degenerate);
  if (degenerateCount) {
    *degenerateCount = 0;
    for (bool d : degenerate)
      if (d) ++*degenerateCount;
  }

  double fwd = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    auto [j, d2] = testTree.nearest(ref.points[i]);
    if (degenerate[i]) {
      fwd += d2;  // fall back to the point-to-point displacement
    } else {
      const double proj = dot(test.points[j] - ref.points[i], normals[i]);
      fwd += proj * proj;
    }
  }
  fwd /= static_cast<double>(ref.size());

  double bwd = 0.0;
  for (size_t i = 0; i < test.size(); ++i) {
    auto [j, d2] = refTree.nearest(test.points[i]);
    if (degenerate[j]) {
      bwd += d2;
    } else {
      const double proj = dot(test.points[i] - ref.points[j], normals[j]);
      bwd += proj * proj;
    }
  }
  bwd /= static_cast<double>(test.size());

  return psnrFromMse(std::max(fwd, bwd), peak);
}

double chamferDistance(const PointCloud& ref, const PointCloud& test) {
  if (ref.empty() || test.empty()) throw DomainError("chamfer: empty cloud");
  KdTree refTree(ref.points), testTree(test.points);
  return directionalMse(ref, testTree) + directionalMse(test, refTree);
}

double bitError(double targetRate, double achievedRate) {
  if (!(targetRate > 0.0)) throw DomainError("bitError: target rate must be positive");
  return std::abs(targetRate - achievedRate) / targetRate;
}

namespace {

struct FittedCurve {
  double coeff[4] = {0, 0, 0, 0};  // y = c0 + c1 u + c2 u^2 + c3 u^3
  double minPsnr = 0.0, maxPsnr = 0.0;
  bool nonMonotone = false;
};

FittedCurve fitCurve(std::span<const RdPoint> curve, Quality quality, double lo, double hi) {
  std::vector<std::pair<double, double>> pts;  // (psnr, log10 bpp)
  for (const auto& p : curve) {
    const double q = quality == Quality::D1 ? p.d1Psnr : p.d2Psnr;
    if (!std::isfinite(q)) throw DomainError("bdRate: non-finite PSNR in curve");
    if (!(p.bpp > 0.0)) throw DomainError("bdRate: rate must be positive");
    pts.emplace_back(q, std::log10(p.bpp));
  }
  std::sort(pts.begin(), pts.end());

  FittedCurve fit;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].first == pts[i - 1].first) throw DomainError("bdRate: duplicate PSNR in curve");
    if (pts[i].second < pts[i - 1].second) fit.nonMonotone = true;
  }
  fit.minPsnr = pts.front().first;
  fit.maxPsnr = pts.back().first;

  // least-squares cubic on u = (psnr - lo) / (hi - lo)
  double A[4][5] = {};
  for (const auto& [x, y] : pts) {
    const double u = (x - lo) / (hi - lo);
    double pw[7] = {1, 0, 0, 0, 0, 0, 0};
    for (int j = 1; j < 7; ++j) pw[j] = pw[j - 1] * u;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) A[r][c] += pw[r + c];
      A[r][4] += pw[r] * y;
    }
  }
  // Gaussian elimination with partial pivoting
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-30) throw DomainError("bdRate: singular fit");
    if (piv != col)
      for (int c = 0; c < 5; ++c) std::swap(A[piv][c], A[col][c]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < 5; ++c) A[r][c] -= f * A[col][c];
    }
  }
  for (int r = 0; r < 4; ++r) fit.coeff[r] = A[r][4] / A[r][r];
  return fit;
}

double psnrRange(std::span<const RdPoint> curve, Quality quality, bool wantMax) {
  double best = wantMax ? -1e300 : 1e300;
  for (const auto& p : curve) {
    const double q = quality == Quality::D1 ? p.d1Psnr : p.d2Psnr;
    best = wantMax ? std::max(best, q) : std::min(best, q);
  }
  return best;
}

}  // namespace

BdResult bdRate(std::span<const RdPoint> curveA, std::span<const RdPoint> curveB, Quality quality) {
  if (curveA.size() < 4 || curveB.size() < 4)
    throw DomainError("bdRate: each curve needs at least 4 points");
  const double lo = std::max(psnrRange(curveA, quality, false), psnrRange(curveB, quality, false));
  const double hi = std::min(psnrRange(curveA, quality, true), psnrRange(curveB, quality, true));
  if (!(hi > lo)) throw DomainError("bdRate: PSNR ranges do not overlap");

  FittedCurve fa = fitCurve(curveA, quality, lo, hi);
  FittedCurve fb = fitCurve(curveB, quality, lo, hi);

  // overlap maps onto u in [0,1]; the interval mean is the plain integral
  auto integral01 = [](const double c[4]) { return c[0] + c[1] / 2.0 + c[2] / 3.0 + c[3] / 4.0; };
  const double avgDiff = integral01(fb.coeff) - integral01(fa.coeff);

  BdResult res;
  res.percent = (std::pow(10.0, avgDiff) - 1.0) * 100.0;
  res.nonMonotone = fa.nonMonotone || fb.nonMonotone;
  return res;
}

void writeRdCsv(const std::string& path, std::span<const RdPoint> points) {
  std::ofstream f(path);
  if (!f) throw OlcError(path + ": cannot open for writing");
  f << "label,bpp,d1_psnr,d2_psnr,chamfer\n";
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g\n", p.label.c_str(), p.bpp, p.d1Psnr,
                  p.d2Psnr, p.chamfer);
    f << buf;
  }
}

std::vector<RdPoint> readRdCsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw OlcError(path + ": cannot open");
  std::vector<RdPoint> out;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line.rfind("label,", 0) == 0) continue;  // header row
    }
    std::istringstream ls(line);
    RdPoint p;
    std::string field;
    if (!std::getline(ls, p.label, ',')) continue;
    auto num = [&](double& v) {
      if (!std::getline(ls, field, ',')) throw OlcError(path + ": malformed RD csv row");
      v = std::strtod(field.c_str(), nullptr);
    };
    num(p.bpp);
    num(p.d1Psnr);
    num(p.d2Psnr);
    num(p.chamfer);
    out.push_back(p);
  }
  return out;
}

}  // namespace olc
