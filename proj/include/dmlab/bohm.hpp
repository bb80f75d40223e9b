#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "dmlab/lindblad.hpp"
#include "dmlab/propagator.hpp"
#include "dmlab/stats.hpp"
#include "dmlab/velocity.hpp"

namespace dmlab {

// Actual particle configurations. Positions live on the N-torus [0, L)^N;
// per-trajectory RNG streams are derived from (master seed, index) so results
// are independent of thread count and scheduling.
struct TrajectoryEnsemble {
  Eigen::MatrixXd positions;           // n x N
  std::vector<std::uint64_t> seeds;    // per-trajectory stream seeds
  std::vector<std::uint8_t> flagged;   // hit a node even under substepping
  double time = 0.0;

  std::int64_t size() const { return positions.rows(); }
  std::int64_t activeCount() const;
};

// n i.i.d. draws from the cell probabilities (inverse CDF over cells, then
// uniform jitter inside the cell). Deterministic given the seed.
TrajectoryEnsemble sampleInitial(const RVec& cellProbabilities,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed);
TrajectoryEnsemble sampleInitial(const PureState& psi, const LatticeSpace& space,
                                 std::int64_t n, std::uint64_t seed);
TrajectoryEnsemble sampleInitial(const DensityMatrix& w,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed);
TrajectoryEnsemble sampleInitial(const MixtureState& w,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed);

// Velocity-field snapshots on a fixed micro-time grid t = t0 + k * dtMicro
// with dtMicro = dt/8: a full RK4 step consumes micro indices {0,4,8} and the
// 4x substep fallback consumes the odd ones. Providers are driven serially by
// the integrator; the parallel trajectory phase only reads prepared fields.
class FieldProvider {
 public:
  FieldProvider(const LatticeSpace& space, double t0, double dtMicro)
      : space_(&space), t0_(t0), dtMicro_(dtMicro) {}
  virtual ~FieldProvider() = default;

  virtual const VelocityField& at(std::int64_t micro) = 0;
  virtual void dropBefore(std::int64_t) {}

  const LatticeSpace& space() const { return *space_; }
  double t0() const { return t0_; }
  double dtMicro() const { return dtMicro_; }
  double timeOf(std::int64_t micro) const { return t0_ + micro * dtMicro_; }

  // Grid-cell probabilities carried by the field at a micro time.
  RVec cellProbabilities(std::int64_t micro);

 protected:
  const LatticeSpace* space_;
  double t0_;
  double dtMicro_;
};

// Unitary branch evolution: one weighted set of pure branches, each supplying
// its amplitudes at an arbitrary absolute time.
struct EvolvingBranch {
  double weight;
  std::function<Vec(double)> stateAt;
};

class MixtureFieldProvider : public FieldProvider {
 public:
  MixtureFieldProvider(const LatticeSpace& space, KineticMetric metric,
                       std::vector<EvolvingBranch> branches, double t0,
                       double dtMicro);
  const VelocityField& at(std::int64_t micro) override;
  void dropBefore(std::int64_t micro) override;

 private:
  KineticMetric metric_;
  std::vector<EvolvingBranch> branches_;
  std::map<std::int64_t, VelocityField> cache_;
};

// GKLS-evolved kernel: the whole micro grid is integrated once up front at
// the micro step (which must satisfy the stability guard).
class LindbladFieldProvider : public FieldProvider {
 public:
  LindbladFieldProvider(const LatticeSpace& space, KineticMetric metric,
                        const DensityMatrix& w0, const Mat& h,
                        const LindbladSpec& spec, double t0, double dtMicro,
                        std::int64_t microCount);
  const VelocityField& at(std::int64_t micro) override;
  const Mat& finalKernel() const { return finalKernel_; }

 private:
  std::vector<VelocityField> fields_;
  Mat finalKernel_;
};

struct IntegrateOptions {
  // Heuristic guard dt <= a / (guardFactor * v_typ); 0 disables the check.
  double guardFactor = 10.0;
  bool strict = false;  // escalate guard violations and flag overruns
  int threads = 0;      // 0 = auto
  double flaggedFractionLimit = 0.01;
};

struct IntegrationReport {
  std::int64_t flaggedCount = 0;
  std::int64_t retriedSteps = 0;
  double flaggedFraction = 0.0;
  bool guardViolated = false;
};

// Advance `steps` RK4 steps of size 8 * dtMicro on the provider's grid. The
// ensemble time must lie on that grid. Near-node steps are retried with 4x
// substepping; trajectories that still hit a node are flagged and frozen.
TrajectoryEnsemble advanceEnsemble(const TrajectoryEnsemble& ensemble,
                                   FieldProvider& provider, long steps,
                                   const IntegrateOptions& options = {},
                                   IntegrationReport* report = nullptr);

// Guiding-state dynamics for the convenience entry point.
struct PureDynamics {
  PureState psi;
  const Propagator* prop;
};
struct DensityDynamics {
  DensityMatrix w;
  const Propagator* prop;
};
struct MixtureDynamics {
  MixtureState w;
  const Propagator* prop;
};
struct LindbladDynamics {
  DensityMatrix w;
  Mat h;
  LindbladSpec spec;
};
using GuidingDynamics =
    std::variant<PureDynamics, DensityDynamics, MixtureDynamics,
                 LindbladDynamics>;

std::unique_ptr<FieldProvider> makeFieldProvider(
    const GuidingDynamics& dynamics, const LatticeSpace& space,
    const KineticMetric& metric, double t0, double dtMicro,
    std::int64_t microCount);

// Integrate from the ensemble's time to tFinal with requested step dt
// (rounded to an integer step count). Guiding states are taken at the
// ensemble's current time.
TrajectoryEnsemble integrateEnsemble(const TrajectoryEnsemble& ensemble,
                                     const GuidingDynamics& dynamics,
                                     const LatticeSpace& space, double tFinal,
                                     double dt,
                                     const IntegrateOptions& options = {},
                                     IntegrationReport* report = nullptr);

// Histogram binning: `binsPerAxis` must divide the grid size.
struct Binning {
  int binsPerAxis;
};

RVec binCellProbabilities(const RVec& cellProbs, const LatticeSpace& space,
                          const Binning& binning);
RVec binnedHistogram(const TrajectoryEnsemble& ensemble,
                     const LatticeSpace& space, const Binning& binning);

// Total-variation distance between the ensemble histogram and reference cell
// probabilities, both aggregated to the given binning (native cells by
// default). Flagged trajectories are excluded.
double equivarianceCheck(const TrajectoryEnsemble& ensemble,
                         const RVec& referenceCellProbs,
                         const LatticeSpace& space,
                         std::optional<Binning> binning = std::nullopt);

struct EquivalenceReport {
  std::vector<double> times;
  std::vector<double> tvBetweenArms;    // binned position histograms
  std::vector<KsResult> ks;             // worst (min-p) coordinate per time
  std::vector<double> tvKernelArm;      // kernel arm vs exact diag, diagnostic
  std::vector<double> tvEnsembleArm;    // ensemble arm vs exact diag
  double flaggedFractionA = 0.0;
  double flaggedFractionB = 0.0;
};

// Two-theory comparison: arm A samples from the kernel diagonal and is guided
// by the evolving kernel; arm B first draws a branch from `branchWeights`,
// then samples from that branch and is guided by it. `truthBranches` describe
// the kernel's own branch decomposition (used to build arm A's exact field).
EquivalenceReport equivalenceExperiment(
    const LatticeSpace& space, const KineticMetric& metric,
    const std::vector<EvolvingBranch>& truthBranches,
    const std::vector<EvolvingBranch>& sampledBranches,
    const std::vector<double>& branchWeights, const std::vector<double>& times,
    double dt, std::int64_t n, std::uint64_t seed, const Binning& binning,
    const IntegrateOptions& options = {});

// Dense-state wrapper: checks that the decomposition reassembles W0 within
// 1e-10, then runs the experiment under the Hamiltonian propagator.
EquivalenceReport theoremOneExperiment(
    const DensityMatrix& w0,
    const std::vector<std::pair<double, PureState>>& decomposition,
    const Propagator& prop, const LatticeSpace& space,
    const std::vector<double>& times, double dt, std::int64_t n,
    std::uint64_t seed, const Binning& binning,
    const IntegrateOptions& options = {});

}  // namespace dmlab
