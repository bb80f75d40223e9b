#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dmlab/state_ops.hpp"

namespace dmlab {

// Constrained subspace H_R of a bipartite space C^{dS} (x) C^{dE}, given by
// an orthonormal basis (columns). The identity basis (full space) is kept
// implicit so large ambients stay cheap. States here use the abstract
// unit-measure convention (cell volume 1).
class SubspaceConstraint {
 public:
  static SubspaceConstraint fullSpace(std::int64_t dimS, std::int64_t dimE);
  static SubspaceConstraint fromBasis(std::int64_t dimS, std::int64_t dimE,
                                      Mat basis);

  std::int64_t dimS() const { return dimS_; }
  std::int64_t dimE() const { return dimE_; }
  std::int64_t ambientDim() const { return dimS_ * dimE_; }
  std::int64_t subspaceDim() const { return r_; }
  bool isFullSpace() const { return basis_.size() == 0; }
  const Mat& basis() const { return basis_; }  // empty when full space

 private:
  SubspaceConstraint() = default;
  std::int64_t dimS_ = 0, dimE_ = 0, r_ = 0;
  Mat basis_;
};

// Uniform (surface measure) draw from the unit sphere of H_R: r independent
// standard complex Gaussians through the basis, normalized.
PureState sampleHaar(const SubspaceConstraint& constraint, std::mt19937_64& g);

// W_R = I_R / dim H_R, the maximally mixed state on the subspace.
DensityMatrix normalizedProjection(const SubspaceConstraint& constraint);

// Partial trace over the environment factor. States must carry unit measure
// (abstract factors; the lattice bridge goes through the splitting module).
DensityMatrix reduceToSubsystem(const PureState& psi, std::int64_t dimS,
                                std::int64_t dimE);
DensityMatrix reduceToSubsystem(const DensityMatrix& w, std::int64_t dimS,
                                std::int64_t dimE);

enum class SubspaceRule {
  kFullSpace,
  kRandomSubspace,  // Haar-random r-dimensional subspace
  kEnergyShell,     // eigenvectors of a random Hermitian operator inside a
                    // central eigenvalue window
};

SubspaceConstraint buildSubspace(SubspaceRule rule, std::int64_t dimS,
                                 std::int64_t dimE, std::int64_t r,
                                 std::mt19937_64& g);

struct TypicalityRow {
  std::int64_t dimS;
  std::int64_t dimE;
  std::int64_t r;
  std::int64_t samples;
  double meanD;
  double maxD;
  double stdD;
  std::uint64_t seed;
};

// For each environment dimension: draws Haar states from the constrained
// subspace and reports statistics of D_i = traceDistance(rho_S^{psi_i},
// rho_S^{W_R}). Sample draws use per-index streams and a compensated
// reduction, so rows are independent of the thread count.
std::vector<TypicalityRow> typicalityExperiment(
    std::int64_t dimS, const std::vector<std::int64_t>& dimEs,
    SubspaceRule rule, std::int64_t samples, std::uint64_t seed,
    int threads = 0);

// Trace distance between the running Monte Carlo average of |psi><psi| and
// W_R, after each sample count in `counts` (counts ascending).
std::vector<double> haarAverageConvergence(const SubspaceConstraint& constraint,
                                           const std::vector<std::int64_t>& counts,
                                           std::uint64_t seed);

std::string typicalityCsv(const std::vector<TypicalityRow>& rows);

}  // namespace dmlab
