#pragma once

#include <span>
#include <vector>

#include "dmlab/common.hpp"

namespace dmlab {

// Compensated (Kahan) accumulator; keeps reductions reproducible to ~1e-16
// independently of summand magnitudes.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Total variation distance between two probability vectors of equal length.
double totalVariation(const RVec& p, const RVec& q);

struct KsResult {
  double statistic = 0.0;
  double pValue = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ksTwoSample(std::vector<double> a, std::vector<double> b);

// Regularized incomplete gamma functions (series / continued fraction).
double regularizedGammaP(double a, double x);
double regularizedGammaQ(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chiSquarePValue(double chi2, double dof);

// Pearson chi-square statistic of observed counts against expected
// probabilities (cells with expected count < minExpected are pooled).
struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double pValue = 1.0;
};
ChiSquareResult chiSquareGoodnessOfFit(const std::vector<std::int64_t>& counts,
                                       const RVec& expectedProbs,
                                       double minExpected = 5.0);

// Least-squares slope of log(y) against log(x).
double fitLogLogSlope(std::span<const double> x, std::span<const double> y);

struct SampleStats {
  double mean = 0.0;
  double max = 0.0;
  double stddev = 0.0;
};
SampleStats summarize(std::span<const double> values);

}  // namespace dmlab
