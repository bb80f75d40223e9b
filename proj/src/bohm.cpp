#include "dmlab/bohm.hpp"

#include <algorithm>
#include <cmath>

#include "dmlab/rng.hpp"
#include "dmlab/state_ops.hpp"
#include "dmlab/threads.hpp"

namespace dmlab {

std::int64_t TrajectoryEnsemble::activeCount() const {
  std::int64_t n = 0;
  for (auto f : flagged)
    if (!f) ++n;
  return n;
}

TrajectoryEnsemble sampleInitial(const RVec& cellProbabilities,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed) {
  if (n < 1) throw ValidationError("sampleInitial: n must be >= 1");
  if (cellProbabilities.size() != space.dim())
    throw ValidationError("sampleInitial: distribution size mismatch");

  // Cumulative distribution over cells, shared by every trajectory stream.
  std::vector<double> cdf(cellProbabilities.size());
  KahanSum acc;
  for (Eigen::Index i = 0; i < cellProbabilities.size(); ++i) {
    acc.add(std::max(0.0, cellProbabilities[i]));
    cdf[i] = acc.value();
  }
  double total = cdf.back();

  TrajectoryEnsemble e;
  e.positions.resize(n, space.particles());
  e.seeds.resize(n);
  e.flagged.assign(n, 0);
  e.time = 0.0;
  std::vector<int> digits(space.particles());
  for (std::int64_t i = 0; i < n; ++i) {
    e.seeds[i] = deriveSeed(seed, i);
    std::mt19937_64 g(e.seeds[i]);
    double u = uniform01(g) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::int64_t cell = std::min<std::int64_t>(
        std::distance(cdf.begin(), it), space.dim() - 1);
    space.unflatten(cell, digits);
    // Cells are centered on their grid points: jitter in [-a/2, a/2).
    for (int p = 0; p < space.particles(); ++p)
      e.positions(i, p) =
          space.wrap((digits[p] + uniform01(g) - 0.5) * space.spacing());
  }
  return e;
}

TrajectoryEnsemble sampleInitial(const PureState& psi,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed) {
  return sampleInitial(diagonalDistribution(psi), space, n, seed);
}

TrajectoryEnsemble sampleInitial(const DensityMatrix& w,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed) {
  return sampleInitial(diagonalDistribution(w), space, n, seed);
}

TrajectoryEnsemble sampleInitial(const MixtureState& w,
                                 const LatticeSpace& space, std::int64_t n,
                                 std::uint64_t seed) {
  return sampleInitial(w.diagonalProbabilities(), space, n, seed);
}

RVec FieldProvider::cellProbabilities(std::int64_t micro) {
  RVec p = at(micro).weight.cwiseMax(0.0) * space_->cellVolume();
  double s = p.sum();
  if (!(s > 0.0))
    throw ValidationError("FieldProvider: vanishing state weight");
  return p / s;
}

MixtureFieldProvider::MixtureFieldProvider(const LatticeSpace& space,
                                           KineticMetric metric,
                                           std::vector<EvolvingBranch> branches,
                                           double t0, double dtMicro)
    : FieldProvider(space, t0, dtMicro), metric_(std::move(metric)),
      branches_(std::move(branches)) {
  if (branches_.empty())
    throw ValidationError("MixtureFieldProvider: no branches");
}

const VelocityField& MixtureFieldProvider::at(std::int64_t micro) {
  auto it = cache_.find(micro);
  if (it != cache_.end()) return it->second;
  double t = timeOf(micro);
  std::vector<WeightedVector> snapshot;
  snapshot.reserve(branches_.size());
  for (const auto& b : branches_)
    snapshot.push_back({b.weight, b.stateAt(t)});
  auto [pos, inserted] =
      cache_.emplace(micro, buildField(*space_, metric_, snapshot, t));
  return pos->second;
}

void MixtureFieldProvider::dropBefore(std::int64_t micro) {
  cache_.erase(cache_.begin(), cache_.lower_bound(micro));
}

LindbladFieldProvider::LindbladFieldProvider(
    const LatticeSpace& space, KineticMetric metric, const DensityMatrix& w0,
    const Mat& h, const LindbladSpec& spec, double t0, double dtMicro,
    std::int64_t microCount)
    : FieldProvider(space, t0, dtMicro) {
  if (w0.dim() != space.dim())
    throw ValidationError("LindbladFieldProvider: dimension mismatch");
  LindbladStepper stepper(h, spec, dtMicro, w0.cellVolume());
  fields_.reserve(microCount + 1);
  Mat w = w0.entries();
  DensityMatrix view = DensityMatrix::trusted(w, w0.cellVolume());
  fields_.push_back(buildField(space, metric, view, t0));
  for (std::int64_t k = 1; k <= microCount; ++k) {
    stepper.step(w);
    DensityMatrix snap = DensityMatrix::trusted(w, w0.cellVolume());
    fields_.push_back(buildField(space, metric, snap, timeOf(k)));
  }
  finalKernel_ = std::move(w);
}

const VelocityField& LindbladFieldProvider::at(std::int64_t micro) {
  if (micro < 0 || micro >= static_cast<std::int64_t>(fields_.size()))
    throw ValidationError("LindbladFieldProvider: micro index out of range");
  return fields_[micro];
}

// One RK4 step of size dt in the time-interpolated field, using snapshots at
// the step endpoints and midpoint. Returns false if any stage lands in a
// node cell; the position is then left untouched.
static bool rk4Step(const LatticeSpace& space, const VelocityField& f0,
                    const VelocityField& fHalf, const VelocityField& f1,
                    double dt, RVec& q) {
  FieldSample s1 = sampleField(f0, space, q);
  if (s1.node) return false;
  FieldSample s2 = sampleField(fHalf, space, q + (0.5 * dt) * s1.v);
  if (s2.node) return false;
  FieldSample s3 = sampleField(fHalf, space, q + (0.5 * dt) * s2.v);
  if (s3.node) return false;
  FieldSample s4 = sampleField(f1, space, q + dt * s3.v);
  if (s4.node) return false;
  q += (dt / 6.0) * (s1.v + 2.0 * s2.v + 2.0 * s3.v + s4.v);
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = space.wrap(q[i]);
  return true;
}

// Typical velocity scale for the step-size guard: 99.5th percentile of the
// per-cell max axis speed over non-node cells.
static double typicalSpeed(const VelocityField& f) {
  std::vector<double> speeds;
  speeds.reserve(f.weight.size());
  for (Eigen::Index j = 0; j < f.weight.size(); ++j) {
    if (f.weight[j] < f.nodeFloor) continue;
    double s = 0.0;
    for (const auto& v : f.v) s = std::max(s, std::abs(v[j]));
    speeds.push_back(s);
  }
  if (speeds.empty()) return 0.0;
  std::size_t k = static_cast<std::size_t>(0.995 * (speeds.size() - 1));
  std::nth_element(speeds.begin(), speeds.begin() + k, speeds.end());
  return speeds[k];
}

TrajectoryEnsemble advanceEnsemble(const TrajectoryEnsemble& ensemble,
                                   FieldProvider& provider, long steps,
                                   const IntegrateOptions& options,
                                   IntegrationReport* report) {
  const LatticeSpace& space = provider.space();
  if (ensemble.positions.cols() != space.particles())
    throw ValidationError("advanceEnsemble: configuration width mismatch");
  double dt = 8.0 * provider.dtMicro();
  double offset = (ensemble.time - provider.t0()) / provider.dtMicro();
  std::int64_t micro0 = std::llround(offset);
  if (std::abs(offset - micro0) > 1e-6)
    throw ValidationError("advanceEnsemble: time not on the provider grid");

  IntegrationReport rep;
  TrajectoryEnsemble out = ensemble;
  std::int64_t n = out.size();
  int threads = resolveThreadCount(options.threads);

  if (options.guardFactor > 0.0 && steps > 0) {
    double vTyp = typicalSpeed(provider.at(micro0));
    if (vTyp > 0.0 && dt > space.spacing() / (options.guardFactor * vTyp)) {
      rep.guardViolated = true;
      if (options.strict)
        throw StepSizeError(
            "advanceEnsemble: dt exceeds a / (guard * v_typ) in strict mode");
    }
  }

  std::vector<std::uint8_t> retry(n, 0);
  for (long s = 0; s < steps; ++s) {
    std::int64_t base = micro0 + 8 * s;
    const VelocityField& f0 = provider.at(base);
    const VelocityField& f4 = provider.at(base + 4);
    const VelocityField& f8 = provider.at(base + 8);

    parallelFor(n, threads, [&](std::int64_t lo, std::int64_t hi) {
      RVec q(space.particles());
      for (std::int64_t i = lo; i < hi; ++i) {
        if (out.flagged[i]) continue;
        q = out.positions.row(i);
        if (rk4Step(space, f0, f4, f8, dt, q))
          out.positions.row(i) = q;
        else
          retry[i] = 1;
      }
    });

    for (std::int64_t i = 0; i < n; ++i) {
      if (!retry[i]) continue;
      retry[i] = 0;
      ++rep.retriedSteps;
      RVec q = out.positions.row(i);
      bool ok = true;
      for (int u = 0; u < 4 && ok; ++u) {
        const VelocityField& g0 = provider.at(base + 2 * u);
        const VelocityField& gh = provider.at(base + 2 * u + 1);
        const VelocityField& g1 = provider.at(base + 2 * u + 2);
        ok = rk4Step(space, g0, gh, g1, dt / 4.0, q);
      }
      if (ok) {
        out.positions.row(i) = q;
      } else {
        out.flagged[i] = 1;
        ++rep.flaggedCount;
      }
    }
    provider.dropBefore(base + 8);
  }

  out.time = provider.timeOf(micro0 + 8 * steps);
  std::int64_t flaggedTotal = n - out.activeCount();
  rep.flaggedFraction = n > 0 ? static_cast<double>(flaggedTotal) / n : 0.0;
  if (rep.flaggedFraction > options.flaggedFractionLimit && options.strict)
    throw Error("advanceEnsemble: flagged trajectory fraction " +
                std::to_string(rep.flaggedFraction) +
                " exceeds limit in strict mode");
  if (report) *report = rep;
  return out;
}

std::unique_ptr<FieldProvider> makeFieldProvider(
    const GuidingDynamics& dynamics, const LatticeSpace& space,
    const KineticMetric& metric, double t0, double dtMicro,
    std::int64_t microCount) {
  if (const auto* d = std::get_if<PureDynamics>(&dynamics)) {
    EvolvingPure ev(*d->prop, d->psi.amplitudes());
    std::vector<EvolvingBranch> branches{
        {1.0, [ev, t0](double t) { return ev.at(t - t0); }}};
    return std::make_unique<MixtureFieldProvider>(space, metric,
                                                  std::move(branches), t0,
                                                  dtMicro);
  }
  if (const auto* d = std::get_if<DensityDynamics>(&dynamics)) {
    MixtureState mix = MixtureState::fromDensity(d->w);
    std::vector<EvolvingBranch> branches;
    for (const auto& b : mix.branches()) {
      EvolvingPure ev(*d->prop, b.amplitudes);
      branches.push_back(
          {b.weight, [ev, t0](double t) { return ev.at(t - t0); }});
    }
    return std::make_unique<MixtureFieldProvider>(space, metric,
                                                  std::move(branches), t0,
                                                  dtMicro);
  }
  if (const auto* d = std::get_if<MixtureDynamics>(&dynamics)) {
    std::vector<EvolvingBranch> branches;
    for (const auto& b : d->w.branches()) {
      EvolvingPure ev(*d->prop, b.amplitudes);
      branches.push_back(
          {b.weight, [ev, t0](double t) { return ev.at(t - t0); }});
    }
    return std::make_unique<MixtureFieldProvider>(space, metric,
                                                  std::move(branches), t0,
                                                  dtMicro);
  }
  const auto& d = std::get<LindbladDynamics>(dynamics);
  return std::make_unique<LindbladFieldProvider>(space, metric, d.w, d.h,
                                                 d.spec, t0, dtMicro,
                                                 microCount);
}

TrajectoryEnsemble integrateEnsemble(const TrajectoryEnsemble& ensemble,
                                     const GuidingDynamics& dynamics,
                                     const LatticeSpace& space, double tFinal,
                                     double dt, const IntegrateOptions& options,
                                     IntegrationReport* report) {
  double span = tFinal - ensemble.time;
  if (span < 0.0) throw ValidationError("integrateEnsemble: tFinal in the past");
  if (span == 0.0) return ensemble;
  long steps = std::max<long>(1, std::lround(std::ceil(span / dt - 1e-12)));
  double dtActual = span / steps;
  auto provider =
      makeFieldProvider(dynamics, space, KineticMetric::standard(space),
                        ensemble.time, dtActual / 8.0, 8 * steps);
  return advanceEnsemble(ensemble, *provider, steps, options, report);
}

RVec binCellProbabilities(const RVec& cellProbs, const LatticeSpace& space,
                          const Binning& binning) {
  int bins = binning.binsPerAxis;
  if (bins < 1 || space.pointsPerAxis() % bins != 0)
    throw ValidationError("Binning: binsPerAxis must divide the grid size");
  int cellsPerBin = space.pointsPerAxis() / bins;
  std::int64_t totalBins = 1;
  for (int p = 0; p < space.particles(); ++p) totalBins *= bins;
  RVec out = RVec::Zero(totalBins);
  std::vector<int> digits(space.particles());
  for (std::int64_t c = 0; c < space.dim(); ++c) {
    space.unflatten(c, digits);
    std::int64_t flat = 0;
    for (int p = 0; p < space.particles(); ++p)
      flat = flat * bins + digits[p] / cellsPerBin;
    out[flat] += cellProbs[c];
  }
  return out;
}

RVec binnedHistogram(const TrajectoryEnsemble& ensemble,
                     const LatticeSpace& space, const Binning& binning) {
  int bins = binning.binsPerAxis;
  if (bins < 1 || space.pointsPerAxis() % bins != 0)
    throw ValidationError("Binning: binsPerAxis must divide the grid size");
  int cellsPerBin = space.pointsPerAxis() / bins;
  std::int64_t totalBins = 1;
  for (int p = 0; p < space.particles(); ++p) totalBins *= bins;
  RVec out = RVec::Zero(totalBins);
  std::int64_t active = 0;
  for (std::int64_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble.flagged[i]) continue;
    std::int64_t flat = 0;
    // Positions map to their nearest grid point, matching the convention
    // that cells are centered on grid points.
    for (int p = 0; p < space.particles(); ++p) {
      int cell = space.snapIndex(ensemble.positions(i, p));
      flat = flat * bins + cell / cellsPerBin;
    }
    out[flat] += 1.0;
    ++active;
  }
  if (active == 0)
    throw ValidationError("binnedHistogram: no active trajectories");
  return out / static_cast<double>(active);
}

double equivarianceCheck(const TrajectoryEnsemble& ensemble,
                         const RVec& referenceCellProbs,
                         const LatticeSpace& space,
                         std::optional<Binning> binning) {
  Binning b = binning.value_or(Binning{space.pointsPerAxis()});
  return totalVariation(binnedHistogram(ensemble, space, b),
                        binCellProbabilities(referenceCellProbs, space, b));
}

EquivalenceReport equivalenceExperiment(
    const LatticeSpace& space, const KineticMetric& metric,
    const std::vector<EvolvingBranch>& truthBranches,
    const std::vector<EvolvingBranch>& sampledBranches,
    const std::vector<double>& branchWeights, const std::vector<double>& times,
    double dt, std::int64_t n, std::uint64_t seed, const Binning& binning,
    const IntegrateOptions& options) {
  if (sampledBranches.size() != branchWeights.size())
    throw ValidationError("equivalenceExperiment: weight per branch required");
  if (times.empty())
    throw ValidationError("equivalenceExperiment: no sample times");

  // Snap sample times onto the step grid.
  std::vector<long> stepIndex;
  for (double t : times) {
    long k = std::lround(t / dt);
    if (std::abs(t - k * dt) > 1e-9)
      throw ValidationError("equivalenceExperiment: times must align with dt");
    stepIndex.push_back(k);
  }
  double dtMicro = dt / 8.0;

  MixtureFieldProvider providerA(space, metric, truthBranches, 0.0, dtMicro);

  // Arm A: positions sampled from the kernel diagonal, guided by the kernel.
  TrajectoryEnsemble armA =
      sampleInitial(providerA.cellProbabilities(0), space, n,
                    deriveSeed(seed, 0xA));

  // Arm B: per-trajectory branch draw, then sample from that branch.
  std::vector<std::unique_ptr<MixtureFieldProvider>> providersB;
  std::vector<RVec> branchCellProbs;
  RVec weights(branchWeights.size());
  for (std::size_t b = 0; b < sampledBranches.size(); ++b) {
    std::vector<EvolvingBranch> one{{1.0, sampledBranches[b].stateAt}};
    providersB.push_back(std::make_unique<MixtureFieldProvider>(
        space, metric, std::move(one), 0.0, dtMicro));
    branchCellProbs.push_back(providersB[b]->cellProbabilities(0));
    weights[b] = branchWeights[b];
  }

  std::uint64_t seedB = deriveSeed(seed, 0xB);
  std::int64_t nB = n;
  std::vector<int> assignment(nB);
  TrajectoryEnsemble armB;
  armB.positions.resize(nB, space.particles());
  armB.seeds.resize(nB);
  armB.flagged.assign(nB, 0);
  armB.time = 0.0;
  {
    std::vector<std::vector<double>> cdfs;
    for (const auto& p : branchCellProbs) {
      std::vector<double> cdf(p.size());
      KahanSum acc;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        acc.add(std::max(0.0, p[i]));
        cdf[i] = acc.value();
      }
      cdfs.push_back(std::move(cdf));
    }
    std::vector<int> digits(space.particles());
    for (std::int64_t i = 0; i < nB; ++i) {
      armB.seeds[i] = deriveSeed(seedB, i);
      std::mt19937_64 g(armB.seeds[i]);
      int b = static_cast<int>(discreteSample(g, weights));
      assignment[i] = b;
      double u = uniform01(g) * cdfs[b].back();
      auto it = std::upper_bound(cdfs[b].begin(), cdfs[b].end(), u);
      std::int64_t cell = std::min<std::int64_t>(
          std::distance(cdfs[b].begin(), it), space.dim() - 1);
      space.unflatten(cell, digits);
      for (int p = 0; p < space.particles(); ++p)
        armB.positions(i, p) =
            space.wrap((digits[p] + uniform01(g) - 0.5) * space.spacing());
    }
  }

  EquivalenceReport rep;
  IntegrationReport ra, rb;
  long prevStep = 0;
  for (std::size_t j = 0; j < stepIndex.size(); ++j) {
    long delta = stepIndex[j] - prevStep;
    if (delta < 0)
      throw ValidationError("equivalenceExperiment: times must be ascending");
    armA = advanceEnsemble(armA, providerA, delta, options, &ra);

    // Advance each branch cohort of arm B under its own guiding state.
    for (std::size_t b = 0; b < providersB.size(); ++b) {
      std::vector<std::int64_t> members;
      for (std::int64_t i = 0; i < nB; ++i)
        if (assignment[i] == static_cast<int>(b)) members.push_back(i);
      if (members.empty()) continue;
      TrajectoryEnsemble cohort;
      cohort.positions.resize(members.size(), space.particles());
      cohort.seeds.resize(members.size());
      cohort.flagged.resize(members.size());
      cohort.time = armB.time;
      for (std::size_t m = 0; m < members.size(); ++m) {
        cohort.positions.row(m) = armB.positions.row(members[m]);
        cohort.seeds[m] = armB.seeds[members[m]];
        cohort.flagged[m] = armB.flagged[members[m]];
      }
      cohort = advanceEnsemble(cohort, *providersB[b], delta, options, &rb);
      for (std::size_t m = 0; m < members.size(); ++m) {
        armB.positions.row(members[m]) = cohort.positions.row(m);
        armB.flagged[members[m]] = cohort.flagged[m];
      }
    }
    armB.time = armA.time;
    prevStep = stepIndex[j];

    RVec histA = binnedHistogram(armA, space, binning);
    RVec histB = binnedHistogram(armB, space, binning);
    RVec exact = binCellProbabilities(
        providerA.cellProbabilities(8 * stepIndex[j]), space, binning);
    rep.times.push_back(armA.time);
    rep.tvBetweenArms.push_back(totalVariation(histA, histB));
    rep.tvKernelArm.push_back(totalVariation(histA, exact));
    rep.tvEnsembleArm.push_back(totalVariation(histB, exact));

    // KS on raw positions, worst coordinate.
    KsResult worst;
    worst.pValue = 2.0;
    for (int p = 0; p < space.particles(); ++p) {
      std::vector<double> xa, xb;
      for (std::int64_t i = 0; i < armA.size(); ++i)
        if (!armA.flagged[i]) xa.push_back(armA.positions(i, p));
      for (std::int64_t i = 0; i < armB.size(); ++i)
        if (!armB.flagged[i]) xb.push_back(armB.positions(i, p));
      KsResult k = ksTwoSample(std::move(xa), std::move(xb));
      if (k.pValue < worst.pValue) worst = k;
    }
    rep.ks.push_back(worst);
  }

  rep.flaggedFractionA =
      static_cast<double>(armA.size() - armA.activeCount()) / armA.size();
  rep.flaggedFractionB =
      static_cast<double>(armB.size() - armB.activeCount()) / armB.size();
  return rep;
}

EquivalenceReport theoremOneExperiment(
    const DensityMatrix& w0,
    const std::vector<std::pair<double, PureState>>& decomposition,
    const Propagator& prop, const LatticeSpace& space,
    const std::vector<double>& times, double dt, std::int64_t n,
    std::uint64_t seed, const Binning& binning,
    const IntegrateOptions& options) {
  DensityMatrix remixed = mixDensity(decomposition);
  double dev = (remixed.entries() - w0.entries()).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw ValidationError(
        "theoremOneExperiment: decomposition does not reassemble W0 (max "
        "deviation " +
        std::to_string(dev) + ")");

  std::vector<EvolvingBranch> truth, sampled;
  std::vector<double> weights;
  for (const auto& [p, psi] : decomposition) {
    EvolvingPure ev(prop, psi.amplitudes());
    auto stateAt = [ev](double t) { return ev.at(t); };
    truth.push_back({p, stateAt});
    sampled.push_back({1.0, stateAt});
    weights.push_back(p);
  }
  return equivalenceExperiment(space, KineticMetric::standard(space), truth,
                               sampled, weights, times, dt, n, seed, binning,
                               options);
}

}  // namespace dmlab
