#include "dmlab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace dmlab {

double totalVariation(const RVec& p, const RVec& q) {
  if (p.size() != q.size())
    throw ValidationError("totalVariation: length mismatch");
  KahanSum s;
  for (Eigen::Index i = 0; i < p.size(); ++i) s.add(std::abs(p[i] - q[i]));
  return 0.5 * s.value();
}

// Asymptotic Kolmogorov survival function Q_KS(lambda).
static double ksSurvival(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    sign = -sign;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ksTwoSample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw ValidationError("ksTwoSample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double xa = a[i], xb = b[j];
    if (xa <= xb) ++i;
    if (xb <= xa) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.pValue = ksSurvival((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

// Incomplete gamma by series expansion (x < a+1).
static double gammaSeriesP(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Incomplete gamma by continued fraction (x >= a+1), Lentz's method.
static double gammaContinuedQ(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double regularizedGammaP(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ValidationError("regularizedGammaP: domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gammaSeriesP(a, x);
  return 1.0 - gammaContinuedQ(a, x);
}

double regularizedGammaQ(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ValidationError("regularizedGammaQ: domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gammaSeriesP(a, x);
  return gammaContinuedQ(a, x);
}

double chiSquarePValue(double chi2, double dof) {
  if (dof <= 0.0) return 1.0;
  return regularizedGammaQ(0.5 * dof, 0.5 * std::max(chi2, 0.0));
}

ChiSquareResult chiSquareGoodnessOfFit(const std::vector<std::int64_t>& counts,
                                       const RVec& expectedProbs,
                                       double minExpected) {
  if (static_cast<Eigen::Index>(counts.size()) != expectedProbs.size())
    throw ValidationError("chiSquareGoodnessOfFit: length mismatch");
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  double n = static_cast<double>(total);

  // Pool cells until each pooled cell has a large enough expected count.
  double chi2 = 0.0;
  int cells = 0;
  double obsPool = 0.0, expPool = 0.0;
  for (Eigen::Index i = 0; i < expectedProbs.size(); ++i) {
    obsPool += static_cast<double>(counts[i]);
    expPool += n * expectedProbs[i];
    if (expPool >= minExpected) {
      double diff = obsPool - expPool;
      chi2 += diff * diff / expPool;
      ++cells;
      obsPool = expPool = 0.0;
    }
  }
  if (expPool > 0.0 && cells > 0) {
    // Fold the remainder into the last cell.
    double diff = obsPool - expPool;
    chi2 += diff * diff / expPool;
  }
  ChiSquareResult r;
  r.statistic = chi2;
  r.dof = std::max(1, cells - 1);
  r.pValue = chiSquarePValue(chi2, r.dof);
  return r;
}

double fitLogLogSlope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("fitLogLogSlope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  if (values.empty()) return s;
  KahanSum sum;
  for (double v : values) {
    sum.add(v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum.value() / static_cast<double>(values.size());
  KahanSum var;
  for (double v : values) var.add((v - s.mean) * (v - s.mean));
  s.stddev = std::sqrt(var.value() / static_cast<double>(values.size()));
  return s;
}

}  // namespace dmlab
