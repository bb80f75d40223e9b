#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmlab/bohm.hpp"
#include "dmlab/presets.hpp"
#include "dmlab/state_ops.hpp"
#include "test_support.hpp"

using namespace dmlab;

namespace {

// Gaussian with a complex width (chirp), so the velocity field is a
// nontrivial analytic function: v(x) = (hbar/m)(k0 - beta (x-c)/(2 sigma^2)).
Vec chirpedGaussian(const LatticeSpace& space, double center, double sigma,
                    double beta, double k0) {
  Vec amp(space.dim());
  for (int j = 0; j < space.pointsPerAxis(); ++j) {
    double x = space.coordinate(j);
    double d = space.minImage(x - center);
    cxd exponent = -cxd(1.0, beta) * d * d / (4.0 * sigma * sigma) +
                   cxd(0.0, k0 * x);
    amp[j] = std::exp(exponent);
  }
  double n2 = space.spacing() * amp.squaredNorm();
  return amp / std::sqrt(n2);
}

}  // namespace

TEST_CASE("plane-wave velocity equals the discrete dispersion speed") {
  // Central differences turn exp(ikx) into v = hbar sin(ka)/(m a); this is
  // hbar k / m up to the documented O((ka)^2) discretization factor.
  int m = 32;
  double a = 0.25;
  LatticeSpace space(1, m, a, {1.7});
  double k = latticeMomentum(3, m, a);
  PureState psi(planeWaveVector(3, m, a), a);
  double expected = kHbar * std::sin(k * a) / (1.7 * a);
  for (double x : {0.0, 1.3, 4.99, 7.03}) {
    RVec q(1);
    q[0] = x;
    RVec v = velocityFieldPure(psi, space, q);
    CHECK(v[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(std::abs(expected - kHbar * k / 1.7) <
        kHbar * k / 1.7 * std::pow(k * a, 2) / 6.0 * 1.01);
}

TEST_CASE("real states generate zero velocity") {
  LatticeSpace space(1, 16, 0.5);
  Vec amp = wrappedGaussian(16, 0.5, 4.0, 1.0, 0.0);
  PureState psi(amp, 0.5);
  RVec q(1);
  q[0] = 3.3;
  CHECK(std::abs(velocityFieldPure(psi, space, q)[0]) < 1e-12);

  // Mixture of two orthogonal real states is still real.
  Vec other = wrappedGaussian(16, 0.5, 1.5, 0.6, 0.0);
  // Gram-Schmidt to make them exactly orthogonal (and still real).
  Vec orth = other - (amp.dot(other) * 0.5 / (0.5 * amp.squaredNorm())) * amp;
  orth /= std::sqrt(0.5 * orth.squaredNorm());
  DensityMatrix w = mixDensity(
      {{0.5, PureState(amp, 0.5)}, {0.5, PureState(orth, 0.5)}});
  CHECK(std::abs(velocityFieldDensity(w, space, q)[0]) < 1e-12);
}

TEST_CASE("kernel field of a rank-1 kernel reduces to the pure field") {
  std::mt19937_64 g(101);
  LatticeSpace space(2, 6, 0.4, {1.0, 2.5});
  for (int trial = 0; trial < 20; ++trial) {
    PureState psi = test::randomPureState(space.dim(), space.cellVolume(), g);
    DensityMatrix w = pureToDensity(psi);
    std::vector<int> digits(2);
    for (std::int64_t cell = 0; cell < space.dim(); ++cell) {
      space.unflatten(cell, digits);
      RVec q(2);
      q[0] = space.coordinate(digits[0]);
      q[1] = space.coordinate(digits[1]);
      RVec vp = velocityFieldPure(psi, space, q);
      RVec vd = velocityFieldDensity(w, space, q);
      CHECK((vp - vd).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("equal mixture of opposite plane waves is at rest") {
  int m = 24;
  double a = 0.3;
  LatticeSpace space(1, m, a);
  DensityMatrix w = mixDensity({{0.5, PureState(planeWaveVector(-2, m, a), a)},
                                {0.5, PureState(planeWaveVector(2, m, a), a)}});
  for (double x : {0.1, 2.2, 5.0, 6.9}) {
    RVec q(1);
    q[0] = x;
    CHECK(std::abs(velocityFieldDensity(w, space, q)[0]) < 1e-12);
  }
}

TEST_CASE("purely real kernels give an identically zero field") {
  std::mt19937_64 g(103);
  LatticeSpace space(1, 12, 0.5);
  Mat raw(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j <= i; ++j) {
      raw(i, j) = std::abs(normalSample(g));
      raw(j, i) = raw(i, j);
    }
  raw = raw * raw.transpose();  // real symmetric PSD
  raw /= 0.5 * raw.trace().real();
  DensityMatrix w = DensityMatrix::fromMatrix(raw, 0.5);
  VelocityField f =
      buildField(space, KineticMetric::standard(space), w, 0.0);
  for (int j = 0; j < 12; ++j) CHECK(std::abs(f.v[0][j]) < 1e-13);
}

TEST_CASE("chirped-packet velocity converges O(a^2) to the analytic field") {
  double L = 8.0;
  double sigma = 0.5, beta = 0.6, center = 0.5 * L;
  int coarseM = 64;
  double k0 = 2.0 * M_PI * 2.0 / L;
  LatticeSpace coarse(1, coarseM, L / coarseM);
  LatticeSpace fine(1, 2 * coarseM, L / (2 * coarseM));
  PureState psiCoarse(chirpedGaussian(coarse, center, sigma, beta, k0),
                      coarse.cellVolume());
  PureState psiFine(chirpedGaussian(fine, center, sigma, beta, k0),
                    fine.cellVolume());

  for (int j : {28, 33, 37}) {
    RVec q(1);
    q[0] = coarse.coordinate(j);  // shared grid point of both lattices
    double analytic =
        kHbar * (k0 - beta * coarse.minImage(q[0] - center) /
                          (2.0 * sigma * sigma));
    double errCoarse =
        std::abs(velocityFieldPure(psiCoarse, coarse, q)[0] - analytic);
    double errFine =
        std::abs(velocityFieldPure(psiFine, fine, q)[0] - analytic);
    double ratio = errCoarse / errFine;
    CHECK(ratio > 2.8);
    CHECK(ratio < 5.5);
    // Richardson extrapolation cancels the leading a^2 term.
    double rich = (4.0 * velocityFieldPure(psiFine, fine, q)[0] -
                   velocityFieldPure(psiCoarse, coarse, q)[0]) / 3.0;
    CHECK(std::abs(rich - analytic) < 0.2 * errFine);
  }
}

TEST_CASE("node cells raise a node error on standalone evaluation") {
  LatticeSpace space(1, 16, 0.5);
  Vec amp = Vec::Zero(16);
  amp[2] = 1.0;  // density concentrated on one cell, nodes elsewhere
  PureState psi = PureState::normalized(amp, 0.5);
  RVec q(1);
  q[0] = space.coordinate(9);
  CHECK_THROWS_AS(velocityFieldPure(psi, space, q), NodeError);
}

TEST_CASE("sampleInitial reproduces the diagonal distribution") {
  LatticeSpace space(1, 16, 0.5);
  DensityMatrix uniform =
      DensityMatrix::maximallyMixed(16, space.cellVolume());
  std::int64_t n = 100000;
  TrajectoryEnsemble e = sampleInitial(uniform, space, n, 2024);

  std::vector<std::int64_t> counts(16, 0);
  for (std::int64_t i = 0; i < n; ++i) counts[space.snapIndex(e.positions(i, 0))] += 1;
  ChiSquareResult chi2 =
      chiSquareGoodnessOfFit(counts, diagonalDistribution(uniform));
  CHECK(chi2.pValue > 0.01);

  // Pure state and its rank-1 kernel share the diagonal, so the draws with a
  // common seed coincide exactly.
  std::mt19937_64 g(107);
  PureState psi = test::randomPureState(16, space.cellVolume(), g);
  TrajectoryEnsemble fromPure = sampleInitial(psi, space, 500, 99);
  TrajectoryEnsemble fromKernel =
      sampleInitial(pureToDensity(psi), space, 500, 99);
  CHECK((fromPure.positions - fromKernel.positions).cwiseAbs().maxCoeff() ==
        0.0);

  // Two-peak state: per-cell frequencies match the Born weights.
  Vec twoPeak = wrappedGaussian(16, 0.5, 2.0, 0.4, 0.0) +
                wrappedGaussian(16, 0.5, 6.0, 0.4, 0.0);
  PureState peaks = PureState::normalized(twoPeak, 0.5);
  RVec born = diagonalDistribution(peaks);
  TrajectoryEnsemble pe = sampleInitial(peaks, space, n, 31);
  std::vector<std::int64_t> pc(16, 0);
  for (std::int64_t i = 0; i < n; ++i) pc[space.snapIndex(pe.positions(i, 0))] += 1;
  for (int c = 0; c < 16; ++c)
    CHECK(std::abs(pc[c] / static_cast<double>(n) - born[c]) <
          3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ground state trajectories are static") {
  LatticeSpace space(1, 24, 0.3);
  double L = space.length();
  Hamiltonian h = buildHamiltonian(space, [L](double q) {
    double d = q - 0.5 * L;
    return 1.5 * d * d;
  });
  Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
  Vec ground = es.eigenvectors().col(0) / std::sqrt(space.cellVolume());
  // Strip the arbitrary global phase so the state is manifestly real.
  cxd phase = ground[12] / std::abs(ground[12]);
  PureState psi(ground / phase, space.cellVolume());
  auto prop = std::make_shared<Propagator>(h, 0.01);

  TrajectoryEnsemble e0 = sampleInitial(psi, space, 200, 5);
  TrajectoryEnsemble e1 = integrateEnsemble(
      e0, PureDynamics{psi, prop.get()}, space, 1.0, 0.01);
  CHECK((e1.positions - e0.positions).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("plane-wave trajectories translate uniformly") {
  int m = 32;
  double a = 0.25;
  LatticeSpace space(1, m, a);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  auto prop = std::make_shared<Propagator>(h, 0.005);
  double k = latticeMomentum(2, m, a);
  PureState psi(planeWaveVector(2, m, a), a);

  TrajectoryEnsemble e0 = sampleInitial(psi, space, 100, 8);
  double tFinal = 1.2;
  TrajectoryEnsemble e1 = integrateEnsemble(
      e0, PureDynamics{psi, prop.get()}, space, tFinal, 0.005);
  double vDiscrete = kHbar * std::sin(k * a) / a;
  for (std::int64_t i = 0; i < e0.size(); ++i) {
    double expected = space.wrap(e0.positions(i, 0) + vDiscrete * tFinal);
    double diff = std::abs(space.minImage(e1.positions(i, 0) - expected));
    CHECK(diff < 1e-8);
  }
  // The discrete speed approximates hbar k/m within the documented O((ka)^2).
  CHECK(std::abs(vDiscrete - kHbar * k) < kHbar * k * std::pow(k * a, 2) / 6.0 * 1.01);
}

TEST_CASE("free Gaussian ensemble stays Born-distributed (equivariance)") {
  LatticeSpace space(1, 64, 0.125);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  auto prop = std::make_shared<Propagator>(h, 4e-3);
  double k0 = latticeMomentum(2, 64, 0.125);
  PureState psi(wrappedGaussian(64, 0.125, 2.0, 0.5, k0), space.cellVolume());

  std::int64_t n = 10000;
  TrajectoryEnsemble e = sampleInitial(psi, space, n, 71);
  CHECK(equivarianceCheck(e, diagonalDistribution(psi), space) < 0.03);

  double tFinal = 0.8;
  e = integrateEnsemble(e, PureDynamics{psi, prop.get()}, space, tFinal, 4e-3);
  PureState psiT = propagatePure(psi, *prop, 200);
  double tv = equivarianceCheck(e, diagonalDistribution(psiT), space);
  CHECK(tv < 0.03);

  // Sanity control: against the un-evolved density the mismatch is large.
  CHECK(equivarianceCheck(e, diagonalDistribution(psi), space) > 0.2);
}

TEST_CASE("integration is invariant under the thread count") {
  LatticeSpace space(1, 32, 0.25);
  Hamiltonian h = buildHamiltonian(space, [](double q) {
    return 1.0 * std::cos(2.0 * M_PI * q / 8.0);
  });
  auto prop = std::make_shared<Propagator>(h, 0.005);
  double k0 = latticeMomentum(1, 32, 0.25);
  PureState psi(wrappedGaussian(32, 0.25, 4.0, 0.6, k0), space.cellVolume());

  TrajectoryEnsemble e0 = sampleInitial(psi, space, 500, 13);
  IntegrateOptions one;
  one.threads = 1;
  IntegrateOptions four;
  four.threads = 4;
  TrajectoryEnsemble a =
      integrateEnsemble(e0, PureDynamics{psi, prop.get()}, space, 0.5, 0.005, one);
  TrajectoryEnsemble b =
      integrateEnsemble(e0, PureDynamics{psi, prop.get()}, space, 0.5, 0.005, four);
  CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("branch-built and dense-kernel fields agree") {
  std::mt19937_64 g(109);
  LatticeSpace space(1, 20, 0.4);
  std::vector<std::pair<double, PureState>> parts = {
      {0.4, test::randomPureState(20, 0.4, g)},
      {0.6, test::randomPureState(20, 0.4, g)}};
  DensityMatrix w = mixDensity(parts);
  KineticMetric metric = KineticMetric::standard(space);
  VelocityField dense = buildField(space, metric, w, 0.0);
  std::vector<WeightedVector> branches;
  for (auto& [p, psi] : parts) branches.push_back({p, psi.amplitudes()});
  VelocityField viaBranches = buildField(space, metric, branches, 0.0);
  for (int j = 0; j < 20; ++j) {
    CHECK(std::abs(dense.v[0][j] - viaBranches.v[0][j]) < 1e-11);
    CHECK(std::abs(dense.weight[j] - viaBranches.weight[j]) < 1e-12);
  }
}

TEST_CASE("theoremOneExperiment: pure kernel gives resampling-level TV") {
  LatticeSpace space(1, 32, 0.25);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  Propagator prop(h, 0.005);
  double k0 = latticeMomentum(1, 32, 0.25);
  PureState psi(wrappedGaussian(32, 0.25, 3.0, 0.6, k0), space.cellVolume());
  DensityMatrix w0 = pureToDensity(psi);

  EquivalenceReport rep = theoremOneExperiment(
      w0, {{1.0, psi}}, prop, space, {0.25, 0.5}, 0.005, 4000, 2027,
      Binning{32});
  for (double tv : rep.tvBetweenArms) CHECK(tv < 0.05);
  for (const auto& ks : rep.ks) CHECK(ks.pValue > 0.01);
  CHECK(rep.flaggedFractionA == 0.0);

  // Decomposition that does not reassemble the kernel is rejected.
  PureState other(wrappedGaussian(32, 0.25, 5.0, 0.6, 0.0), space.cellVolume());
  CHECK_THROWS_AS(
      theoremOneExperiment(w0, {{1.0, other}}, prop, space, {0.25}, 0.005, 10,
                           1, Binning{32}),
      ValidationError);
}

TEST_CASE("two-packet mixture: kernel arm and branch arm agree") {
  LatticeSpace space(1, 32, 0.25);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  Propagator prop(h, 0.005);
  double k = latticeMomentum(1, 32, 0.25);
  // Packets moving apart, so the kernel field never develops a sharp
  // interbranch valley over the sampled window.
  PureState left(wrappedGaussian(32, 0.25, 2.5, 0.5, -k), space.cellVolume());
  PureState right(wrappedGaussian(32, 0.25, 5.5, 0.5, k), space.cellVolume());
  DensityMatrix w0 = mixDensity({{0.5, left}, {0.5, right}});

  EquivalenceReport rep = theoremOneExperiment(
      w0, {{0.5, left}, {0.5, right}}, prop, space, {0.3, 0.6}, 0.005, 4000,
      2028, Binning{16});
  for (double tv : rep.tvBetweenArms) CHECK(tv < 0.05);
  for (double tv : rep.tvKernelArm) CHECK(tv < 0.05);
  for (double tv : rep.tvEnsembleArm) CHECK(tv < 0.05);
}

TEST_CASE("step-size guard reports, and strict mode escalates") {
  LatticeSpace space(1, 32, 0.25);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  auto prop = std::make_shared<Propagator>(h, 0.4);
  double k0 = latticeMomentum(4, 32, 0.25);  // fast packet
  PureState psi(wrappedGaussian(32, 0.25, 4.0, 0.6, k0), space.cellVolume());
  TrajectoryEnsemble e0 = sampleInitial(psi, space, 50, 17);

  IntegrationReport rep;
  IntegrateOptions loose;
  integrateEnsemble(e0, PureDynamics{psi, prop.get()}, space, 0.4, 0.4, loose,
                    &rep);
  CHECK(rep.guardViolated);

  IntegrateOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(integrateEnsemble(e0, PureDynamics{psi, prop.get()}, space,
                                    0.4, 0.4, strict),
                  StepSizeError);
}

TEST_CASE("trajectories stuck at nodes are flagged and excluded") {
  LatticeSpace space(1, 16, 0.5);
  Hamiltonian h = buildHamiltonian(space, [](double) { return 0.0; });
  auto prop = std::make_shared<Propagator>(h, 0.01);
  // Guiding state localized on a couple of cells: an ensemble sampled from
  // the uniform distribution mostly starts inside node cells.
  Vec lump = Vec::Zero(16);
  lump[3] = 1.0;
  lump[4] = 0.7;
  PureState nodal = PureState::normalized(lump, space.cellVolume());
  DensityMatrix uniform = DensityMatrix::maximallyMixed(16, space.cellVolume());
  TrajectoryEnsemble e0 = sampleInitial(uniform, space, 100, 23);

  IntegrationReport rep;
  IntegrateOptions loose;
  TrajectoryEnsemble e1 = integrateEnsemble(
      e0, PureDynamics{nodal, prop.get()}, space, 0.05, 0.01, loose, &rep);
  CHECK(rep.flaggedFraction > 0.5);
  CHECK(e1.activeCount() < e1.size());
  CHECK_NOTHROW(binnedHistogram(e1, space, Binning{16}));

  IntegrateOptions strict;
  strict.strict = true;
  strict.guardFactor = 0.0;  // isolate the flagged-fraction escalation
  CHECK_THROWS_AS(integrateEnsemble(e0, PureDynamics{nodal, prop.get()}, space,
                                    0.05, 0.01, strict),
                  Error);
}

TEST_CASE("binning helpers aggregate consistently") {
  LatticeSpace space(1, 16, 0.5);
  std::mt19937_64 g(201);
  DensityMatrix w = test::randomDensityMatrix(16, 0.5, g);
  RVec cells = diagonalDistribution(w);
  RVec bins = binCellProbabilities(cells, space, Binning{4});
  CHECK(bins.size() == 4);
  CHECK(bins.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bins[0] == doctest::Approx(cells.head(4).sum()).epsilon(1e-12));
  CHECK_THROWS_AS(binCellProbabilities(cells, space, Binning{5}),
                  ValidationError);
}
