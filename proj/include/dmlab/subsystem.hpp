#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmlab/lattice.hpp"
#include "dmlab/state_ops.hpp"

namespace dmlab {

// Partition of the particles into subsystem (x variables) and environment
// (y variables).
struct Splitting {
  std::vector<int> subsystem;
  std::vector<int> environment;

  void validate(const LatticeSpace& space) const;
};

// Cached index maps for one splitting: joint flat index from (subsystem cell,
// environment cell).
class SplitIndex {
 public:
  SplitIndex(const LatticeSpace& space, Splitting split);

  std::int64_t dimSub() const { return offsetsSub_.size(); }
  std::int64_t dimEnv() const { return offsetsEnv_.size(); }
  std::int64_t flat(std::int64_t x, std::int64_t y) const {
    return offsetsSub_[x] + offsetsEnv_[y];
  }

  const Splitting& splitting() const { return split_; }
  const LatticeSpace& space() const { return *space_; }

  // Lattice of the subsystem particles alone (same grid per axis).
  LatticeSpace subsystemSpace() const;

  // Environment cell from continuous environment coordinates (snap to the
  // nearest grid point per axis).
  std::int64_t snapEnvironment(const RVec& envCoords) const;
  RVec snappedCoords(std::int64_t envCell) const;

 private:
  const LatticeSpace* space_;
  Splitting split_;
  std::vector<std::int64_t> offsetsSub_;
  std::vector<std::int64_t> offsetsEnv_;
};

// Subsystem state obtained by inserting the actual environment configuration:
// w(x,x') = W(x,Y,x',Y) / K, always returned normalized (states differing by
// a constant factor are identified).
struct ConditionalState {
  DensityMatrix w;
  RVec environmentPoint;  // snapped coordinates actually used
  double normalization;   // K, the pre-normalization subsystem trace
};

ConditionalState conditionalDensityMatrix(const DensityMatrix& w,
                                          const SplitIndex& split,
                                          const RVec& envCoords);

// Branch-resolved variant; avoids materializing the joint kernel.
ConditionalState conditionalDensityMatrix(const MixtureState& w,
                                          const SplitIndex& split,
                                          const RVec& envCoords);

// Trace distance between conditioning at the two grid cells bracketing the
// continuous environment point (snap-jitter sensitivity).
double conditionJitterSensitivity(const MixtureState& w,
                                  const SplitIndex& split,
                                  const RVec& envCoords);

// P(X in dx | Y): diagonal of the conditional state.
RVec conditionalProbability(const ConditionalState& cond);

// Labeled disjoint sets of environment grid cells with the support
// threshold used by the effective-state predicate.
struct MacroRegionSet {
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> regions;
  double epsilon = 1e-6;

  void validate(std::int64_t dimEnv) const;
  std::optional<std::size_t> regionOf(std::int64_t envCell) const;
};

struct EffectiveState {
  DensityMatrix rho;
  std::string regionLabel;
  double factorResidual;      // trace-norm distance of the region block from
                              // its best product form
  double branchLeakMass;      // environment-marginal mass of the detected
                              // branch outside the region
  double crossCoherenceNorm;  // trace norm of coherences leaving the region
                              // (diagnostic, not gated)
};

// Decides whether the subsystem has an effective state relative to the
// declared regions: the region block of W must factorize as rho (x) gamma
// (operator-Schmidt rank one, trace-norm residual < epsilon), and the
// environment marginal of the detected branch must carry less than epsilon
// mass outside the region containing Y. Returns the normalized rho on
// success; absence otherwise (the conditional state remains available
// either way).
std::optional<EffectiveState> detectEffectiveState(const DensityMatrix& w,
                                                   const SplitIndex& split,
                                                   const RVec& envCoords,
                                                   const MacroRegionSet& regions);

// --- measurement demo ------------------------------------------------------

// Two-particle momentum measurement: particle 0 is the measured subsystem in
// an equal mixture of opposite momentum eigenstates, particle 1 a pointer
// whose displacement is coupled to the subsystem momentum. Kernel-guided
// histories show the conditional state collapse mixed -> pure; pure-state
// histories reproduce the same outcome statistics with pure conditional
// states throughout.
struct DemoParams {
  int pointsPerAxis = 64;
  double spacing = 0.125;
  int momentumMode = 1;          // plane waves at modes +/- momentumMode
  double couplingStrength = 8.0 / M_PI;
  double pointerWidth = 0.35;    // position sd of the pointer packet
  double measurementTime = 1.0;
  double dt = 5e-3;
  double epsilon = 1e-6;         // region disjointness threshold
  std::int64_t runs = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct DemoRunRecord {
  double prePurity;
  double postPurity;
  std::string outcome;  // "psi-" or "psi+"
  bool flagged;
};

struct DemoReport {
  std::vector<DemoRunRecord> kernelRuns;  // guided by the evolving kernel
  std::vector<DemoRunRecord> pureRuns;    // guided by a per-run branch draw
  double kernelFreqMinus = 0.0;
  double pureFreqMinus = 0.0;
  double maxPreDeviation = 0.0;   // max |prePurity - 1/2| over kernel runs
  double minPostPurity = 1.0;     // over non-flagged kernel runs
  double meanJitterSensitivity = 0.0;
  double pointerOverlapMass = 0.0;
  std::int64_t flaggedCount = 0;
};

DemoReport measurementDemo(const DemoParams& params);

}  // namespace dmlab
