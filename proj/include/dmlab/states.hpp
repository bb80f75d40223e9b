#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dmlab/common.hpp"

namespace dmlab {

// Measure convention used throughout: state objects store raw function values
// on the grid and carry the cell volume v (= a^N on a lattice, 1 for abstract
// tensor factors). Inner products, traces and probabilities all weight grid
// sums by v:
//   <phi|psi>    = v * sum_q conj(phi_q) psi_q
//   tr W         = v * sum_q W_qq
//   tr(W^2)      = v^2 * sum_qq' |W_qq'|^2
// Operators (Hamiltonians, unitaries, projectors, collapse operators) are
// plain matrices and compose with states by ordinary matrix products.

class PureState {
 public:
  // Validates the norm invariant: |norm - 1| <= 1e-10.
  PureState(Vec amplitudes, double cellVolume);

  // Rescales to unit norm first (zero vector is an error).
  static PureState normalized(Vec amplitudes, double cellVolume);

  const Vec& amplitudes() const { return amp_; }
  double cellVolume() const { return cell_; }
  std::int64_t dim() const { return amp_.size(); }
  double norm() const;

  cxd innerProduct(const PureState& other) const;

 private:
  Vec amp_;
  double cell_;
};

class DensityMatrix {
 public:
  // Full validation: Hermitian within 1e-10, unit trace within 1e-10,
  // minimum (measure-weighted) eigenvalue >= -1e-8.
  static DensityMatrix fromMatrix(Mat entries, double cellVolume);

  // For kernels that are Hermitian/PSD/normalized by construction; checks
  // only hermiticity and trace (cheap), not the spectrum.
  static DensityMatrix trusted(Mat entries, double cellVolume);

  static DensityMatrix maximallyMixed(std::int64_t dim, double cellVolume);

  const Mat& entries() const { return w_; }
  double cellVolume() const { return cell_; }
  std::int64_t dim() const { return w_.rows(); }

  double trace() const;
  double purity() const;  // tr(W^2), in (0, 1]

  // Spectrum in the measure-weighted sense; for a valid state these are the
  // mixture weights and sum to 1. Ascending order.
  RVec spectrum() const;

  void validate(double hermTol = 1e-10, double traceTol = 1e-10,
                double eigenFloor = -1e-8) const;

 private:
  DensityMatrix(Mat w, double cell) : w_(std::move(w)), cell_(cell) {}
  Mat w_;
  double cell_;
};

// Convex mixture of (not necessarily orthogonal) unit-norm pure states.
// Exactly represents rank-r kernels without materializing the d x d matrix;
// used by the trajectory and collapse engines where r stays small.
struct WeightedVector {
  double weight;   // nonnegative; weights sum to 1
  Vec amplitudes;  // unit norm under the carried measure
};

class MixtureState {
 public:
  MixtureState(std::vector<WeightedVector> branches, double cellVolume);

  static MixtureState fromPure(const PureState& psi);
  static MixtureState fromDecomposition(
      const std::vector<std::pair<double, PureState>>& pairs);
  // Spectral decomposition of a dense kernel (eigenvalues below cutoff are
  // dropped; weights renormalized).
  static MixtureState fromDensity(const DensityMatrix& w,
                                  double weightCutoff = 1e-12);

  const std::vector<WeightedVector>& branches() const { return branches_; }
  double cellVolume() const { return cell_; }
  std::int64_t dim() const { return branches_.front().amplitudes.size(); }
  std::size_t rank() const { return branches_.size(); }

  // Materializes the dense kernel sum_b w_b |psi_b><psi_b|.
  DensityMatrix toDensity() const;

  // Diagonal probabilities p_q = v * sum_b w_b |psi_b(q)|^2 (sum to 1).
  RVec diagonalProbabilities() const;

 private:
  std::vector<WeightedVector> branches_;
  double cell_;
};

}  // namespace dmlab
