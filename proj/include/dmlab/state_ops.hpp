#pragma once

#include <utility>
#include <vector>

#include "dmlab/states.hpp"

namespace dmlab {

// W = |psi><psi| (rank-1 outer product kernel).
DensityMatrix pureToDensity(const PureState& psi);

// W = sum_i p_i |psi_i><psi_i|. Weights must be nonnegative and sum to 1
// within 1e-10.
DensityMatrix mixDensity(const std::vector<std::pair<double, PureState>>& pairs);

// Probability of each grid cell, p_q = v * W(q,q). Entries below -1e-8 raise
// a positivity error; small negative rounding is clipped and renormalized.
RVec diagonalDistribution(const DensityMatrix& w);
RVec diagonalDistribution(const PureState& psi);

// (1/2) * tr |W1 - W2|, in [0, 1]. Computed from the Hermitian spectrum of
// the difference; equals half the singular value sum.
double traceDistance(const DensityMatrix& w1, const DensityMatrix& w2);

// tr(W^2).
double purity(const DensityMatrix& w);

// <psi| W |psi>, real in [0,1]; used for classifying near-pure states.
double fidelityWithPure(const DensityMatrix& w, const PureState& psi);

}  // namespace dmlab
