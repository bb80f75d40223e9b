#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dmlab/propagator.hpp"
#include "dmlab/state_ops.hpp"

namespace dmlab {

// Collapse law constants, in simulation units. The physical magnitudes
// (lambda of order 1e-15 per second, sigma of order 1e-7 m) make desk-scale
// collapse unobservable, so experiments rescale; the physical values are kept
// as documented presets.
struct GrwParams {
  double lambda;  // per-particle collapse rate, > 0
  double sigma;   // collapse width, > 0; sigma >= 2a recommended

  void validate(const LatticeSpace& space) const;
};

inline constexpr double kPhysicalLambdaPerSecond = 1e-15;
inline constexpr double kPhysicalSigmaMeters = 1e-7;

// One collapse record; the (time, particle, center) list is also the flash
// ontology of the f-variants.
struct CollapseEvent {
  double time;
  int particle;   // 0-based label
  double center;  // in [0, L)
};

struct MassDensityField {
  RVec values;      // on the single-particle grid, mass / length
  double spacing;
  double time = 0.0;

  double integral() const { return spacing * values.sum(); }
};

// Gaussian collapse profile of one particle axis, periodic minimum-image
// distance, renormalized on the grid so that a * sum_j profile_j = 1.
RVec collapseProfile(const LatticeSpace& space, double center, double sigma);

// Diagonal collapse operator Lambda_k(x): multiplication by the profile of
// the k-th coordinate, as a length-d diagonal.
RVec collapseOperator(const LatticeSpace& space, int particle, double center,
                      double sigma);

// Marginal position distribution of one particle (sums to 1).
RVec particleMarginal(const PureState& psi, const LatticeSpace& space,
                      int particle);
RVec particleMarginal(const DensityMatrix& w, const LatticeSpace& space,
                      int particle);
RVec particleMarginal(const MixtureState& w, const LatticeSpace& space,
                      int particle);

// Exponential waiting time with rate N * lambda.
double sampleWaitingTime(int particleCount, double lambda, std::mt19937_64& g);

// psi' = Lambda^(1/2) psi / |Lambda^(1/2) psi|.
PureState collapsePure(const PureState& psi, const LatticeSpace& space,
                       int particle, double center, double sigma);

// W' = Lambda^(1/2) W Lambda^(1/2) / tr(W Lambda).
DensityMatrix collapseDensity(const DensityMatrix& w, const LatticeSpace& space,
                              int particle, double center, double sigma);

// Branchwise collapse of a mixture: each branch is squeezed by
// Lambda^(1/2) and reweighted by its Lambda-mass; exactly reproduces the
// kernel collapse of the represented state.
MixtureState collapseMixture(const MixtureState& w, const LatticeSpace& space,
                             int particle, double center, double sigma);

// Collapse-center density rho(x) on grid cells (probabilities, sum 1), and
// a draw from it (cell + uniform jitter).
RVec centerCellProbabilities(const RVec& marginal, const LatticeSpace& space,
                             double sigma);
double sampleCenterPure(const PureState& psi, const LatticeSpace& space,
                        int particle, double sigma, std::mt19937_64& g);
double sampleCenterDensity(const DensityMatrix& w, const LatticeSpace& space,
                           int particle, double sigma, std::mt19937_64& g);
double sampleCenterMixture(const MixtureState& w, const LatticeSpace& space,
                           int particle, double sigma, std::mt19937_64& g);

// m(x) = sum_i m_i * (marginal probability of particle i at x) / a.
MassDensityField massDensity(const PureState& psi, const LatticeSpace& space,
                             double time = 0.0);
MassDensityField massDensity(const DensityMatrix& w, const LatticeSpace& space,
                             double time = 0.0);
MassDensityField massDensity(const MixtureState& w, const LatticeSpace& space,
                             double time = 0.0);

struct GrwHistory {
  MixtureState finalState;
  std::vector<CollapseEvent> events;
  std::vector<MassDensityField> series;
  std::vector<double> sampleTimes;
};

// One stochastic collapse history: exact unitary evolution interrupted at
// exponential times (rate N*lambda) by collapses with uniformly chosen
// particle label and center drawn from the state's center density.
// Deterministic given the seed. Draw order per event: waiting time, label,
// center.
GrwHistory runGrwHistory(const MixtureState& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed);
GrwHistory runGrwHistory(const PureState& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed);
GrwHistory runGrwHistory(const DensityMatrix& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed);

}  // namespace dmlab
