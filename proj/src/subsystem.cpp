#include "dmlab/subsystem.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dmlab/presets.hpp"
#include "dmlab/rng.hpp"
#include "dmlab/threads.hpp"

namespace dmlab {

void Splitting::validate(const LatticeSpace& space) const {
  if (subsystem.empty() || environment.empty())
    throw ValidationError("Splitting: both parts must be nonempty");
  std::set<int> seen;
  for (int p : subsystem) seen.insert(p);
  for (int p : environment) seen.insert(p);
  if (static_cast<int>(seen.size()) !=
          static_cast<int>(subsystem.size() + environment.size()) ||
      static_cast<int>(seen.size()) != space.particles() ||
      *seen.begin() < 0 || *seen.rbegin() >= space.particles())
    throw ValidationError("Splitting: not a partition of the particles");
}

SplitIndex::SplitIndex(const LatticeSpace& space, Splitting split)
    : space_(&space), split_(std::move(split)) {
  split_.validate(space);
  int m = space.pointsPerAxis();

  std::int64_t dSub = 1;
  for (std::size_t i = 0; i < split_.subsystem.size(); ++i) dSub *= m;
  std::int64_t dEnv = 1;
  for (std::size_t i = 0; i < split_.environment.size(); ++i) dEnv *= m;

  offsetsSub_.resize(dSub);
  for (std::int64_t x = 0; x < dSub; ++x) {
    std::int64_t rem = x, off = 0;
    for (auto it = split_.subsystem.rbegin(); it != split_.subsystem.rend();
         ++it) {
      off += (rem % m) * space.stride(*it);
      rem /= m;
    }
    offsetsSub_[x] = off;
  }
  offsetsEnv_.resize(dEnv);
  for (std::int64_t y = 0; y < dEnv; ++y) {
    std::int64_t rem = y, off = 0;
    for (auto it = split_.environment.rbegin();
         it != split_.environment.rend(); ++it) {
      off += (rem % m) * space.stride(*it);
      rem /= m;
    }
    offsetsEnv_[y] = off;
  }
}

LatticeSpace SplitIndex::subsystemSpace() const {
  std::vector<double> masses;
  for (int p : split_.subsystem) masses.push_back(space_->mass(p));
  return LatticeSpace(static_cast<int>(split_.subsystem.size()),
                      space_->pointsPerAxis(), space_->spacing(), masses);
}

std::int64_t SplitIndex::snapEnvironment(const RVec& envCoords) const {
  if (envCoords.size() != static_cast<Eigen::Index>(split_.environment.size()))
    throw ValidationError("SplitIndex: environment coordinate count mismatch");
  int m = space_->pointsPerAxis();
  std::int64_t y = 0;
  for (Eigen::Index i = 0; i < envCoords.size(); ++i)
    y = y * m + space_->snapIndex(envCoords[i]);
  return y;
}

RVec SplitIndex::snappedCoords(std::int64_t envCell) const {
  int m = space_->pointsPerAxis();
  int nEnv = static_cast<int>(split_.environment.size());
  RVec coords(nEnv);
  for (int i = nEnv - 1; i >= 0; --i) {
    coords[i] = space_->coordinate(static_cast<int>(envCell % m));
    envCell /= m;
  }
  return coords;
}

static ConditionalState finishConditional(Mat w, const SplitIndex& split,
                                          std::int64_t envCell) {
  double cellSub = std::pow(split.space().spacing(),
                            static_cast<int>(split.splitting().subsystem.size()));
  double k = cellSub * w.trace().real();
  if (!(k > 1e-14))
    throw ValidationError(
        "conditionalDensityMatrix: conditioning on null environment support");
  w /= k;
  w = 0.5 * (w + Mat(w.adjoint()));
  return ConditionalState{DensityMatrix::trusted(std::move(w), cellSub),
                          split.snappedCoords(envCell), k};
}

ConditionalState conditionalDensityMatrix(const DensityMatrix& w,
                                          const SplitIndex& split,
                                          const RVec& envCoords) {
  std::int64_t y = split.snapEnvironment(envCoords);
  std::int64_t dSub = split.dimSub();
  Mat cond(dSub, dSub);
  for (std::int64_t x = 0; x < dSub; ++x)
    for (std::int64_t xp = 0; xp < dSub; ++xp)
      cond(x, xp) = w.entries()(split.flat(x, y), split.flat(xp, y));
  return finishConditional(std::move(cond), split, y);
}

ConditionalState conditionalDensityMatrix(const MixtureState& w,
                                          const SplitIndex& split,
                                          const RVec& envCoords) {
  std::int64_t y = split.snapEnvironment(envCoords);
  std::int64_t dSub = split.dimSub();
  Mat cond = Mat::Zero(dSub, dSub);
  Vec slice(dSub);
  for (const auto& b : w.branches()) {
    for (std::int64_t x = 0; x < dSub; ++x)
      slice[x] = b.amplitudes[split.flat(x, y)];
    cond.noalias() += b.weight * (slice * slice.adjoint());
  }
  return finishConditional(std::move(cond), split, y);
}

double conditionJitterSensitivity(const MixtureState& w,
                                  const SplitIndex& split,
                                  const RVec& envCoords) {
  // Condition on the grid cells below and above the continuous point along
  // every environment axis and compare.
  const LatticeSpace& space = split.space();
  RVec lower(envCoords.size()), upper(envCoords.size());
  for (Eigen::Index i = 0; i < envCoords.size(); ++i) {
    double x = space.wrap(envCoords[i]);
    double fl = std::floor(x / space.spacing());
    lower[i] = fl * space.spacing();
    upper[i] = (fl + 1.0) * space.spacing();
  }
  ConditionalState a = conditionalDensityMatrix(w, split, lower);
  ConditionalState b = conditionalDensityMatrix(w, split, upper);
  return traceDistance(a.w, b.w);
}

RVec conditionalProbability(const ConditionalState& cond) {
  return diagonalDistribution(cond.w);
}

void MacroRegionSet::validate(std::int64_t dimEnv) const {
  if (regions.empty()) throw ValidationError("MacroRegionSet: no regions");
  std::set<std::int64_t> seen;
  for (const auto& [label, cells] : regions) {
    for (std::int64_t c : cells) {
      if (c < 0 || c >= dimEnv)
        throw ValidationError("MacroRegionSet: cell out of range");
      if (!seen.insert(c).second)
        throw ValidationError("MacroRegionSet: regions overlap");
    }
  }
  if (!(epsilon > 0.0))
    throw ValidationError("MacroRegionSet: epsilon must be > 0");
}

std::optional<std::size_t> MacroRegionSet::regionOf(std::int64_t envCell) const {
  for (std::size_t r = 0; r < regions.size(); ++r)
    for (std::int64_t c : regions[r].second)
      if (c == envCell) return r;
  return std::nullopt;
}

// Measure-weighted trace norm of a plain matrix block.
static double blockTraceNorm(const Mat& block, double measure) {
  if (block.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(block);
  return measure * svd.singularValues().sum();
}

std::optional<EffectiveState> detectEffectiveState(
    const DensityMatrix& w, const SplitIndex& split, const RVec& envCoords,
    const MacroRegionSet& regions) {
  regions.validate(split.dimEnv());
  std::int64_t yCell = split.snapEnvironment(envCoords);
  auto regionIdx = regions.regionOf(yCell);
  if (!regionIdx)
    throw ValidationError(
        "detectEffectiveState: environment point in no declared region");
  const auto& [label, inside] = regions.regions[*regionIdx];
  std::vector<std::int64_t> outside;
  for (std::int64_t y = 0; y < split.dimEnv(); ++y)
    if (std::find(inside.begin(), inside.end(), y) == inside.end())
      outside.push_back(y);

  std::int64_t dSub = split.dimSub();
  std::int64_t nIn = static_cast<std::int64_t>(inside.size());
  std::int64_t nOut = static_cast<std::int64_t>(outside.size());
  double cell = split.space().cellVolume();
  double cellSub = std::pow(
      split.space().spacing(),
      static_cast<int>(split.splitting().subsystem.size()));
  double cellEnv = cell / cellSub;

  // Diagnostic: trace norm of the coherences connecting the region to its
  // complement (both off-diagonal blocks share singular values).
  Mat cross(dSub * nIn, dSub * nOut);
  for (std::int64_t yi = 0; yi < nIn; ++yi)
    for (std::int64_t yo = 0; yo < nOut; ++yo)
      for (std::int64_t x = 0; x < dSub; ++x)
        for (std::int64_t xp = 0; xp < dSub; ++xp)
          cross(yi * dSub + x, yo * dSub + xp) =
              w.entries()(split.flat(x, inside[yi]),
                          split.flat(xp, outside[yo]));
  double crossNorm = 2.0 * blockTraceNorm(cross, cell);

  // Region block reshuffled to the (x x') by (y y') operator-Schmidt matrix.
  Mat k(dSub * dSub, nIn * nIn);
  for (std::int64_t x = 0; x < dSub; ++x)
    for (std::int64_t xp = 0; xp < dSub; ++xp)
      for (std::int64_t yi = 0; yi < nIn; ++yi)
        for (std::int64_t yj = 0; yj < nIn; ++yj)
          k(x * dSub + xp, yi * nIn + yj) =
              w.entries()(split.flat(x, inside[yi]),
                          split.flat(xp, inside[yj]));
  Eigen::JacobiSVD<Mat> schmidt(k, Eigen::ComputeThinU | Eigen::ComputeThinV);

  // Best product approximation rho (x) gamma from the leading Schmidt pair.
  Mat rho(dSub, dSub);
  for (std::int64_t x = 0; x < dSub; ++x)
    for (std::int64_t xp = 0; xp < dSub; ++xp)
      rho(x, xp) = schmidt.matrixU()(x * dSub + xp, 0);

  // Residual of the region block from the product form, in trace norm over
  // the embedded (subsystem x region) space.
  Mat gamma(nIn, nIn);
  for (std::int64_t yi = 0; yi < nIn; ++yi)
    for (std::int64_t yj = 0; yj < nIn; ++yj)
      gamma(yi, yj) = schmidt.matrixV()(yi * nIn + yj, 0);
  double s0 = schmidt.singularValues()[0];
  Mat embedded(dSub * nIn, dSub * nIn);
  for (std::int64_t x = 0; x < dSub; ++x)
    for (std::int64_t xp = 0; xp < dSub; ++xp)
      for (std::int64_t yi = 0; yi < nIn; ++yi)
        for (std::int64_t yj = 0; yj < nIn; ++yj)
          embedded(yi * dSub + x, yj * dSub + xp) =
              w.entries()(split.flat(x, inside[yi]),
                          split.flat(xp, inside[yj])) -
              s0 * rho(x, xp) * gamma(yi, yj);
  double residual = blockTraceNorm(embedded, cell);
  if (residual >= regions.epsilon) return std::nullopt;

  // Normalize the factor: Hermitize and rescale to unit trace.
  rho = 0.5 * (rho + Mat(rho.adjoint()));
  double tr = cellSub * rho.trace().real();
  if (std::abs(tr) < 1e-300) return std::nullopt;
  rho /= tr;

  // Environment marginal of the detected branch, from the Frobenius
  // projection of every environment-diagonal slice onto rho. For a branch
  // decomposition with subsystem factors orthogonal to rho this recovers
  // weight * gamma(y,y), so the sum outside the region is the branch's
  // leaked mass.
  double rhoNorm2 = cellSub * cellSub * rho.squaredNorm();
  auto branchWeightAt = [&](std::int64_t y) {
    cxd acc = 0.0;
    for (std::int64_t x = 0; x < dSub; ++x)
      for (std::int64_t xp = 0; xp < dSub; ++xp)
        acc += std::conj(rho(x, xp)) * w.entries()(split.flat(x, y),
                                                   split.flat(xp, y));
    return std::max(0.0, cellSub * cellSub * acc.real() / rhoNorm2);
  };
  double leak = 0.0;
  for (std::int64_t yo = 0; yo < nOut; ++yo)
    leak += branchWeightAt(outside[yo]) * cellEnv;
  if (leak >= regions.epsilon) return std::nullopt;

  return EffectiveState{DensityMatrix::trusted(std::move(rho), cellSub), label,
                        residual, leak, crossNorm};
}

// --- measurement demo ------------------------------------------------------

DemoReport measurementDemo(const DemoParams& params) {
  Sec52Params sp;
  sp.pointsPerAxis = params.pointsPerAxis;
  sp.spacing = params.spacing;
  sp.momentumMode = params.momentumMode;
  sp.couplingStrength = params.couplingStrength;
  sp.pointerWidth = params.pointerWidth;
  sp.measurementTime = params.measurementTime;
  sp.dt = params.dt;
  sp.epsilon = params.epsilon;
  Sec52Scenario sc = makeSec52Scenario(sp);
  const LatticeSpace& space = *sc.bohm.space;

  // Pointer records at measurement time, and their region masses.
  Vec phiMinusT = sc.pointerMinusAt(params.measurementTime);
  Vec phiPlusT = sc.pointerPlusAt(params.measurementTime);
  auto regionMass = [&](const Vec& phi, const std::vector<std::int64_t>& cells) {
    double massIn = 0.0;
    for (std::int64_t c : cells) massIn += std::norm(phi[c]);
    return space.spacing() * massIn;
  };
  double leakMinus = 1.0 - regionMass(phiMinusT, sc.regions.regions[0].second);
  double leakPlus = 1.0 - regionMass(phiPlusT, sc.regions.regions[1].second);
  DemoReport report;
  report.pointerOverlapMass = std::max(leakMinus, leakPlus);
  if (report.pointerOverlapMass > params.epsilon)
    throw ConfigError(
        "measurementDemo: pointer records not disjoint at measurement time");

  SplitIndex split(space, sc.split);
  double cellVol = space.cellVolume();

  // Kernel-guided histories: one equilibrium ensemble, guided by the evolving
  // two-branch kernel; each history's conditional state is read off its own
  // pointer position.
  MixtureFieldProvider provider(space, sc.bohm.metric, sc.bohm.truthBranches,
                                0.0, params.dt / 8.0);
  TrajectoryEnsemble kernelRuns = sampleInitial(
      provider.cellProbabilities(0), space, params.runs, deriveSeed(params.seed, 0xD0));
  long steps = std::lround(params.measurementTime / params.dt);
  IntegrateOptions opt;
  opt.threads = params.threads;
  IntegrationReport ir;
  TrajectoryEnsemble kernelFinal =
      advanceEnsemble(kernelRuns, provider, steps, opt, &ir);

  // Pure-state histories: a branch is drawn per run; the conditional state of
  // the subsystem is that branch itself, pure at all times.
  std::uint64_t branchSeed = deriveSeed(params.seed, 0xD1);
  std::vector<int> assignment(params.runs);
  for (std::int64_t i = 0; i < params.runs; ++i) {
    std::mt19937_64 g(deriveSeed(branchSeed, i));
    assignment[i] = uniform01(g) < 0.5 ? 0 : 1;
  }

  MixtureState mixtureT1(
      {{0.5, kronProduct(space, {sc.psiMinus, sc.pointerReady})},
       {0.5, kronProduct(space, {sc.psiPlus, sc.pointerReady})}},
      cellVol);
  MixtureState mixtureT2(
      {{0.5, kronProduct(space, {sc.psiMinus, phiMinusT})},
       {0.5, kronProduct(space, {sc.psiPlus, phiPlusT})}},
      cellVol);

  PureState psiMinusState(sc.psiMinus, space.spacing());
  PureState psiPlusState(sc.psiPlus, space.spacing());

  KahanSum jitterAcc;
  std::int64_t freqMinusKernel = 0, freqMinusPure = 0;
  for (std::int64_t i = 0; i < params.runs; ++i) {
    DemoRunRecord rec;
    rec.flagged = kernelFinal.flagged[i] != 0;

    // Pre-measurement: conditional state at the initial pointer position.
    RVec y0(1);
    y0[0] = kernelRuns.positions(i, 1);
    ConditionalState pre = conditionalDensityMatrix(mixtureT1, split, y0);
    rec.prePurity = pre.w.purity();

    // Post-measurement: conditional state at the final pointer position.
    RVec yT(1);
    yT[0] = kernelFinal.positions(i, 1);
    ConditionalState post = conditionalDensityMatrix(mixtureT2, split, yT);
    rec.postPurity = post.w.purity();
    double fMinus = fidelityWithPure(post.w, psiMinusState);
    double fPlus = fidelityWithPure(post.w, psiPlusState);
    rec.outcome = fMinus >= fPlus ? "psi-" : "psi+";

    report.kernelRuns.push_back(rec);
    if (!rec.flagged) {
      report.maxPreDeviation =
          std::max(report.maxPreDeviation, std::abs(rec.prePurity - 0.5));
      report.minPostPurity = std::min(report.minPostPurity, rec.postPurity);
      if (rec.outcome == "psi-") ++freqMinusKernel;
      jitterAcc.add(conditionJitterSensitivity(mixtureT2, split, yT));
    } else {
      ++report.flaggedCount;
    }

    // Pure-state counterpart: the branch draw is the outcome; its
    // conditional state is pure throughout.
    DemoRunRecord prec;
    prec.flagged = false;
    prec.prePurity = 1.0;
    prec.postPurity = 1.0;
    prec.outcome = assignment[i] == 0 ? "psi-" : "psi+";
    if (prec.outcome == "psi-") ++freqMinusPure;
    report.pureRuns.push_back(prec);
  }

  std::int64_t active = params.runs - report.flaggedCount;
  report.kernelFreqMinus =
      active > 0 ? static_cast<double>(freqMinusKernel) / active : 0.0;
  report.pureFreqMinus =
      static_cast<double>(freqMinusPure) / static_cast<double>(params.runs);
  report.meanJitterSensitivity =
      active > 0 ? jitterAcc.value() / static_cast<double>(active) : 0.0;
  return report;
}

}  // namespace dmlab
