#include "dmlab/states.hpp"

#include <cmath>
#include <string>

namespace dmlab {

PureState::PureState(Vec amplitudes, double cellVolume)
    : amp_(std::move(amplitudes)), cell_(cellVolume) {
  if (amp_.size() == 0) throw ValidationError("PureState: empty amplitudes");
  if (!(cell_ > 0.0)) throw ValidationError("PureState: cell volume must be > 0");
  double n = norm();
  if (std::abs(n - 1.0) > 1e-10)
    throw ValidationError("PureState: norm " + std::to_string(n) +
                          " violates unit-norm invariant");
}

PureState PureState::normalized(Vec amplitudes, double cellVolume) {
  double n2 = cellVolume * amplitudes.squaredNorm();
  if (!(n2 > 0.0)) throw ValidationError("PureState: cannot normalize zero vector");
  amplitudes /= std::sqrt(n2);
  return PureState(std::move(amplitudes), cellVolume);
}

double PureState::norm() const { return std::sqrt(cell_ * amp_.squaredNorm()); }

cxd PureState::innerProduct(const PureState& other) const {
  if (other.dim() != dim() || other.cell_ != cell_)
    throw ValidationError("PureState: inner product shape mismatch");
  return cell_ * amp_.dot(other.amp_);  // Eigen dot conjugates the left factor
}

DensityMatrix DensityMatrix::fromMatrix(Mat entries, double cellVolume) {
  DensityMatrix w(std::move(entries), cellVolume);
  w.validate();
  return w;
}

DensityMatrix DensityMatrix::trusted(Mat entries, double cellVolume) {
  DensityMatrix w(std::move(entries), cellVolume);
  if (w.w_.rows() != w.w_.cols())
    throw ValidationError("DensityMatrix: not square");
  double herm = (w.w_ - w.w_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-9)
    throw ValidationError("DensityMatrix: hermiticity violated by " +
                          std::to_string(herm));
  double tr = w.trace();
  if (std::abs(tr - 1.0) > 1e-9)
    throw ValidationError("DensityMatrix: trace " + std::to_string(tr));
  return w;
}

DensityMatrix DensityMatrix::maximallyMixed(std::int64_t dim,
                                            double cellVolume) {
  Mat w = Mat::Identity(dim, dim) / (cellVolume * static_cast<double>(dim));
  return DensityMatrix(std::move(w), cellVolume);
}

double DensityMatrix::trace() const { return cell_ * w_.trace().real(); }

double DensityMatrix::purity() const {
  return cell_ * cell_ * w_.squaredNorm();
}

RVec DensityMatrix::spectrum() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (w_ + w_.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return cell_ * es.eigenvalues();
}

void DensityMatrix::validate(double hermTol, double traceTol,
                             double eigenFloor) const {
  if (w_.rows() != w_.cols()) throw ValidationError("DensityMatrix: not square");
  if (!(cell_ > 0.0))
    throw ValidationError("DensityMatrix: cell volume must be > 0");
  double herm = (w_ - w_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > hermTol)
    throw ValidationError("DensityMatrix: hermiticity violated by " +
                          std::to_string(herm));
  double tr = trace();
  if (std::abs(tr - 1.0) > traceTol)
    throw ValidationError("DensityMatrix: trace " + std::to_string(tr) +
                          " violates unit-trace invariant");
  double minEig = spectrum().minCoeff();
  if (minEig < eigenFloor)
    throw ValidationError("DensityMatrix: negative eigenvalue " +
                          std::to_string(minEig));
}

MixtureState::MixtureState(std::vector<WeightedVector> branches,
                           double cellVolume)
    : branches_(std::move(branches)), cell_(cellVolume) {
  if (branches_.empty()) throw ValidationError("MixtureState: no branches");
  double total = 0.0;
  for (const auto& b : branches_) {
    if (b.weight < 0.0) throw ValidationError("MixtureState: negative weight");
    if (b.amplitudes.size() != branches_.front().amplitudes.size())
      throw ValidationError("MixtureState: branch dimension mismatch");
    total += b.weight;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw ValidationError("MixtureState: weights sum to " +
                          std::to_string(total));
}

MixtureState MixtureState::fromPure(const PureState& psi) {
  return MixtureState({{1.0, psi.amplitudes()}}, psi.cellVolume());
}

MixtureState MixtureState::fromDecomposition(
    const std::vector<std::pair<double, PureState>>& pairs) {
  if (pairs.empty()) throw ValidationError("MixtureState: empty decomposition");
  std::vector<WeightedVector> branches;
  branches.reserve(pairs.size());
  for (const auto& [p, psi] : pairs) branches.push_back({p, psi.amplitudes()});
  return MixtureState(std::move(branches), pairs.front().second.cellVolume());
}

MixtureState MixtureState::fromDensity(const DensityMatrix& w,
                                       double weightCutoff) {
  Eigen::SelfAdjointEigenSolver<Mat> es(
      0.5 * (w.entries() + w.entries().adjoint()));
  double cell = w.cellVolume();
  std::vector<WeightedVector> branches;
  double kept = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double weight = cell * es.eigenvalues()[k];  // measure-weighted spectrum
    if (weight <= weightCutoff) continue;
    // Eigenvectors come out plain-unit-norm; rescale to the carried measure.
    Vec v = es.eigenvectors().col(k) / std::sqrt(cell);
    branches.push_back({weight, std::move(v)});
    kept += weight;
  }
  if (branches.empty())
    throw ValidationError("MixtureState: kernel has no positive spectrum");
  for (auto& b : branches) b.weight /= kept;
  return MixtureState(std::move(branches), cell);
}

DensityMatrix MixtureState::toDensity() const {
  std::int64_t d = dim();
  Mat w = Mat::Zero(d, d);
  for (const auto& b : branches_)
    w.noalias() += b.weight * (b.amplitudes * b.amplitudes.adjoint());
  return DensityMatrix::trusted(std::move(w), cell_);
}

RVec MixtureState::diagonalProbabilities() const {
  RVec p = RVec::Zero(dim());
  for (const auto& b : branches_)
    p += b.weight * b.amplitudes.cwiseAbs2();
  return cell_ * p;
}

}  // namespace dmlab
