#include "dmlab/state_ops.hpp"

#include <cmath>
#include <string>

namespace dmlab {

DensityMatrix pureToDensity(const PureState& psi) {
  Mat w = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix::trusted(std::move(w), psi.cellVolume());
}

DensityMatrix mixDensity(
    const std::vector<std::pair<double, PureState>>& pairs) {
  if (pairs.empty()) throw ValidationError("mixDensity: empty mixture");
  double total = 0.0;
  for (const auto& [p, psi] : pairs) {
    if (p < 0.0) throw ValidationError("mixDensity: negative weight");
    if (psi.dim() != pairs.front().second.dim() ||
        psi.cellVolume() != pairs.front().second.cellVolume())
      throw ValidationError("mixDensity: mismatched states");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw ValidationError("mixDensity: weights sum to " + std::to_string(total));
  std::int64_t d = pairs.front().second.dim();
  Mat w = Mat::Zero(d, d);
  for (const auto& [p, psi] : pairs)
    w.noalias() += p * (psi.amplitudes() * psi.amplitudes().adjoint());
  return DensityMatrix::trusted(std::move(w), pairs.front().second.cellVolume());
}

RVec diagonalDistribution(const DensityMatrix& w) {
  RVec p = w.cellVolume() * w.entries().diagonal().real();
  double minEntry = p.minCoeff();
  if (minEntry < -1e-8)
    throw ValidationError("diagonalDistribution: diagonal entry " +
                          std::to_string(minEntry) + " violates positivity");
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

RVec diagonalDistribution(const PureState& psi) {
  RVec p = psi.cellVolume() * psi.amplitudes().cwiseAbs2();
  return p / p.sum();
}

double traceDistance(const DensityMatrix& w1, const DensityMatrix& w2) {
  if (w1.dim() != w2.dim())
    throw ValidationError("traceDistance: dimension mismatch");
  if (w1.cellVolume() != w2.cellVolume())
    throw ValidationError("traceDistance: measure mismatch");
  Mat diff = w1.entries() - w2.entries();
  diff = 0.5 * (diff + Mat(diff.adjoint()));
  Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * w1.cellVolume() * es.eigenvalues().cwiseAbs().sum();
}

double purity(const DensityMatrix& w) { return w.purity(); }

double fidelityWithPure(const DensityMatrix& w, const PureState& psi) {
  double v = w.cellVolume();
  cxd f = psi.amplitudes().dot(w.entries() * psi.amplitudes());
  return v * v * f.real();
}

}  // namespace dmlab
