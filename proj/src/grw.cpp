#include "dmlab/grw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmlab/rng.hpp"

namespace dmlab {

void GrwParams::validate(const LatticeSpace& space) const {
  (void)space;
  if (!(lambda > 0.0)) throw ValidationError("GrwParams: lambda must be > 0");
  if (!(sigma > 0.0)) throw ValidationError("GrwParams: sigma must be > 0");
}

RVec collapseProfile(const LatticeSpace& space, double center, double sigma) {
  int m = space.pointsPerAxis();
  RVec g(m);
  for (int j = 0; j < m; ++j) {
    double d = space.minImage(space.coordinate(j) - center);
    g[j] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  double z = space.spacing() * g.sum();
  if (!(z > 0.0)) throw ValidationError("collapseProfile: vanishing profile");
  return g / z;
}

RVec collapseOperator(const LatticeSpace& space, int particle, double center,
                      double sigma) {
  if (particle < 0 || particle >= space.particles())
    throw ValidationError("collapseOperator: invalid particle label");
  RVec profile = collapseProfile(space, center, sigma);
  RVec diag(space.dim());
  for (std::int64_t q = 0; q < space.dim(); ++q)
    diag[q] = profile[space.axisIndex(q, particle)];
  return diag;
}

RVec particleMarginal(const PureState& psi, const LatticeSpace& space,
                      int particle) {
  RVec marg = RVec::Zero(space.pointsPerAxis());
  const Vec& a = psi.amplitudes();
  for (std::int64_t q = 0; q < space.dim(); ++q)
    marg[space.axisIndex(q, particle)] += std::norm(a[q]);
  return marg * space.cellVolume();
}

RVec particleMarginal(const DensityMatrix& w, const LatticeSpace& space,
                      int particle) {
  RVec marg = RVec::Zero(space.pointsPerAxis());
  for (std::int64_t q = 0; q < space.dim(); ++q)
    marg[space.axisIndex(q, particle)] += w.entries()(q, q).real();
  return (marg * space.cellVolume()).cwiseMax(0.0);
}

RVec particleMarginal(const MixtureState& w, const LatticeSpace& space,
                      int particle) {
  RVec marg = RVec::Zero(space.pointsPerAxis());
  for (const auto& b : w.branches()) {
    for (std::int64_t q = 0; q < space.dim(); ++q)
      marg[space.axisIndex(q, particle)] += b.weight * std::norm(b.amplitudes[q]);
  }
  return marg * space.cellVolume();
}

double sampleWaitingTime(int particleCount, double lambda,
                         std::mt19937_64& g) {
  if (particleCount < 1)
    throw ValidationError("sampleWaitingTime: need at least one particle");
  return exponentialSample(g, particleCount * lambda);
}

PureState collapsePure(const PureState& psi, const LatticeSpace& space,
                       int particle, double center, double sigma) {
  RVec lambdaDiag = collapseOperator(space, particle, center, sigma);
  Vec squeezed = lambdaDiag.cwiseSqrt().cast<cxd>().cwiseProduct(psi.amplitudes());
  double norm2 = space.cellVolume() * squeezed.squaredNorm();
  if (norm2 <= 1e-14)
    throw ValidationError(
        "collapsePure: collapse center in a zero-amplitude region");
  return PureState(squeezed / std::sqrt(norm2), psi.cellVolume());
}

DensityMatrix collapseDensity(const DensityMatrix& w, const LatticeSpace& space,
                              int particle, double center, double sigma) {
  RVec lambdaDiag = collapseOperator(space, particle, center, sigma);
  RVec root = lambdaDiag.cwiseSqrt();
  double denom = space.cellVolume() *
                 (w.entries().diagonal().real().array() * lambdaDiag.array()).sum();
  if (denom <= 1e-14)
    throw ValidationError(
        "collapseDensity: collapse center in a zero-weight region");
  Mat out = (root.cast<cxd>().asDiagonal() * w.entries()) *
            root.cast<cxd>().asDiagonal();
  out /= denom;
  return DensityMatrix::trusted(std::move(out), w.cellVolume());
}

MixtureState collapseMixture(const MixtureState& w, const LatticeSpace& space,
                             int particle, double center, double sigma) {
  RVec root =
      collapseOperator(space, particle, center, sigma).cwiseSqrt();
  std::vector<WeightedVector> branches;
  double total = 0.0;
  for (const auto& b : w.branches()) {
    Vec squeezed = root.cast<cxd>().cwiseProduct(b.amplitudes);
    double mass = space.cellVolume() * squeezed.squaredNorm();
    double weight = b.weight * mass;  // tr-weight of the collapsed branch
    if (weight <= 0.0) continue;
    branches.push_back({weight, squeezed / std::sqrt(mass)});
    total += weight;
  }
  if (total <= 1e-14)
    throw ValidationError(
        "collapseMixture: collapse center in a zero-weight region");
  for (auto& b : branches) b.weight /= total;
  return MixtureState(std::move(branches), w.cellVolume());
}

RVec centerCellProbabilities(const RVec& marginal, const LatticeSpace& space,
                             double sigma) {
  int m = space.pointsPerAxis();
  // rho(x_c) = sum_j marginal_j * profile(q_j - x_c); the profile depends
  // only on the offset, so precompute it once around zero.
  RVec offsetProfile = collapseProfile(space, 0.0, sigma);
  RVec rho = RVec::Zero(m);
  for (int c = 0; c < m; ++c) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j)
      acc += marginal[j] * offsetProfile[((j - c) % m + m) % m];
    rho[c] = acc;
  }
  return rho * space.spacing();  // cell probabilities, sum exactly 1
}

static double drawCenter(const RVec& cellProbs, const LatticeSpace& space,
                         std::mt19937_64& g) {
  double u = uniform01(g) * cellProbs.sum();
  double acc = 0.0;
  int cell = space.pointsPerAxis() - 1;
  for (int c = 0; c < space.pointsPerAxis(); ++c) {
    acc += cellProbs[c];
    if (u < acc) {
      cell = c;
      break;
    }
  }
  // Jitter within the cell centered on the grid point.
  return space.wrap((cell + uniform01(g) - 0.5) * space.spacing());
}

double sampleCenterPure(const PureState& psi, const LatticeSpace& space,
                        int particle, double sigma, std::mt19937_64& g) {
  return drawCenter(
      centerCellProbabilities(particleMarginal(psi, space, particle), space, sigma),
      space, g);
}

double sampleCenterDensity(const DensityMatrix& w, const LatticeSpace& space,
                           int particle, double sigma, std::mt19937_64& g) {
  return drawCenter(
      centerCellProbabilities(particleMarginal(w, space, particle), space, sigma),
      space, g);
}

double sampleCenterMixture(const MixtureState& w, const LatticeSpace& space,
                           int particle, double sigma, std::mt19937_64& g) {
  return drawCenter(
      centerCellProbabilities(particleMarginal(w, space, particle), space, sigma),
      space, g);
}

template <typename State>
static MassDensityField massDensityImpl(const State& s,
                                        const LatticeSpace& space,
                                        double time) {
  MassDensityField f;
  f.spacing = space.spacing();
  f.time = time;
  f.values = RVec::Zero(space.pointsPerAxis());
  for (int p = 0; p < space.particles(); ++p)
    f.values += space.mass(p) * particleMarginal(s, space, p) / space.spacing();
  return f;
}

MassDensityField massDensity(const PureState& psi, const LatticeSpace& space,
                             double time) {
  return massDensityImpl(psi, space, time);
}
MassDensityField massDensity(const DensityMatrix& w, const LatticeSpace& space,
                             double time) {
  return massDensityImpl(w, space, time);
}
MassDensityField massDensity(const MixtureState& w, const LatticeSpace& space,
                             double time) {
  return massDensityImpl(w, space, time);
}

GrwHistory runGrwHistory(const MixtureState& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed) {
  params.validate(space);
  if (initial.dim() != space.dim())
    throw ValidationError("runGrwHistory: dimension mismatch");
  for (std::size_t i = 1; i < sampleTimes.size(); ++i)
    if (sampleTimes[i] < sampleTimes[i - 1])
      throw ValidationError("runGrwHistory: sample times must be ascending");

  std::mt19937_64 g(deriveSeed(seed, 0));
  std::vector<WeightedVector> branches = initial.branches();
  double t = 0.0;

  auto evolveTo = [&](double tNew) {
    double delta = tNew - t;
    if (delta == 0.0) return;
    for (auto& b : branches)
      b.amplitudes = prop.evolveVector(b.amplitudes, delta);
    t = tNew;
  };

  GrwHistory history{initial, {}, {}, sampleTimes};
  std::size_t si = 0;
  while (true) {
    double tau = sampleWaitingTime(space.particles(), params.lambda, g);
    double tEvent = t + tau;
    double horizon = std::min(tEvent, tFinal);
    while (si < sampleTimes.size() && sampleTimes[si] <= horizon + 1e-12) {
      evolveTo(sampleTimes[si]);
      MixtureState snap(branches, initial.cellVolume());
      history.series.push_back(massDensity(snap, space, t));
      ++si;
    }
    if (tEvent >= tFinal) {
      evolveTo(tFinal);
      break;
    }
    evolveTo(tEvent);
    int k = static_cast<int>(uniformIndex(g, space.particles()));
    MixtureState current(branches, initial.cellVolume());
    double x = sampleCenterMixture(current, space, k, params.sigma, g);
    current = collapseMixture(current, space, k, x, params.sigma);
    branches = current.branches();
    history.events.push_back({tEvent, k, x});
  }
  history.finalState = MixtureState(std::move(branches), initial.cellVolume());
  return history;
}

GrwHistory runGrwHistory(const PureState& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed) {
  return runGrwHistory(MixtureState::fromPure(initial), prop, space, params,
                       tFinal, sampleTimes, seed);
}

GrwHistory runGrwHistory(const DensityMatrix& initial, const Propagator& prop,
                         const LatticeSpace& space, const GrwParams& params,
                         double tFinal, const std::vector<double>& sampleTimes,
                         std::uint64_t seed) {
  return runGrwHistory(MixtureState::fromDensity(initial), prop, space, params,
                       tFinal, sampleTimes, seed);
}

}  // namespace dmlab
