#pragma once

#include <memory>
#include <string>

#include "dmlab/bohm.hpp"
#include "dmlab/grw.hpp"
#include "dmlab/subsystem.hpp"

namespace dmlab {

// Wrapped Gaussian packet on the periodic grid:
//   phi(x) ~ exp(i k x) * sum_w exp(-(x - center + w L)^2 / (4 sigma^2)),
// normalized; sigma is the position standard deviation of |phi|^2.
Vec wrappedGaussian(int m, double spacing, double center, double sigma,
                    double momentum = 0.0);

// Product vector over the joint lattice, particle 0 slowest.
Vec kronProduct(const LatticeSpace& space, const std::vector<Vec>& factors);

// One bundled trajectory scenario: guiding kernel given as weighted evolving
// branches, per-branch pure-state arms, and the comparison statistics setup.
struct BohmScenario {
  std::string name;
  std::shared_ptr<LatticeSpace> space;
  KineticMetric metric;
  std::vector<EvolvingBranch> truthBranches;
  std::vector<EvolvingBranch> sampledBranches;  // unit-weight branch states
  std::vector<double> branchWeights;
  std::vector<double> sampleTimes;
  double dt = 0.0;
  Binning binning{1};
  // owners of the propagators captured inside the branch closures
  std::vector<std::shared_ptr<const Propagator>> keepAlive;
};

// Free Gaussian packet, single particle.
BohmScenario makeFreePacketScenario();

// Gaussian packet oscillating in one well of a periodic double well.
BohmScenario makeDoubleWellScenario();

// Momentum-measurement scenario: particle 0 in an equal mixture of opposite
// momentum eigenstates, particle 1 a pointer packet displaced by the
// momentum-pointer coupling g P_x P_y. Branches evolve in exact product form
// (the subsystem factors are momentum eigenstates); the kinetic metric
// carries the coupling cross term.
struct Sec52Params {
  int pointsPerAxis = 64;
  double spacing = 0.125;
  int momentumMode = 1;
  double couplingStrength = 8.0 / M_PI;
  double pointerWidth = 0.35;
  double measurementTime = 1.0;
  double dt = 5e-3;
  int binsPerAxis = 8;
  double epsilon = 1e-6;
};

struct Sec52Scenario {
  BohmScenario bohm;
  Sec52Params params;
  Vec psiMinus, psiPlus;  // subsystem momentum eigenstates (factor vectors)
  Vec pointerReady;
  std::function<Vec(double)> pointerMinusAt, pointerPlusAt;
  double pointerShift = 0.0;  // displacement magnitude at measurement time
  Splitting split;            // subsystem {0}, environment {1}
  MacroRegionSet regions;     // pointer-record regions at measurement time
};

Sec52Scenario makeSec52Scenario(const Sec52Params& params = {});

// Dense joint Hamiltonian of the same scenario (small grids only); used to
// cross-check the product-branch fast path against generic dense evolution.
Hamiltonian sec52DenseHamiltonian(const Sec52Params& params);

// Two moving packets mixed 50/50 under stochastic collapse.
struct GrwScenario {
  std::string name;
  std::shared_ptr<LatticeSpace> space;
  std::shared_ptr<const Propagator> prop;
  std::vector<std::pair<double, PureState>> decomposition;
  MixtureState mixture;
  GrwParams params{1.0, 0.5};
  double tFinal = 0.0;
  std::vector<double> sampleTimes;
};

GrwScenario makeGrwDiagramScenario();

// Moving packet under position dephasing; the gamma = 0 arm is closed
// (unitary) dynamics.
struct LindbladScenario {
  std::string name;
  std::shared_ptr<LatticeSpace> space;
  Hamiltonian hamiltonian;
  std::shared_ptr<const Propagator> prop;
  PureState packet;
  LindbladSpec spec;
  double gamma = 0.0;
  double tFinal = 0.0;
  double dt = 0.0;
  Binning binning{1};
};

LindbladScenario makeLindbladDephasingScenario(double gamma);

// Divergence threshold for the dephasing scenario at gamma = 1, registered
// from a 10x-trajectory (n = 1e5) calibration run before the main
// experiments were frozen: observed TV 0.1936 at t = tFinal. The gate is set
// at 60% of the calibrated value.
inline constexpr double kLindbladDivergenceThreshold = 0.12;

}  // namespace dmlab
