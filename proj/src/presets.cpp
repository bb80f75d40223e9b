#include "dmlab/presets.hpp"

#include <cmath>

namespace dmlab {

Vec wrappedGaussian(int m, double spacing, double center, double sigma,
                    double momentum) {
  double L = m * spacing;
  Vec phi(m);
  for (int j = 0; j < m; ++j) {
    double x = j * spacing;
    double env = 0.0;
    for (int w = -3; w <= 3; ++w) {
      double d = x - center + w * L;
      env += std::exp(-d * d / (4.0 * sigma * sigma));
    }
    double phase = momentum * x;
    phi[j] = env * cxd(std::cos(phase), std::sin(phase));
  }
  double n2 = spacing * phi.squaredNorm();
  return phi / std::sqrt(n2);
}

Vec kronProduct(const LatticeSpace& space, const std::vector<Vec>& factors) {
  if (static_cast<int>(factors.size()) != space.particles())
    throw ValidationError("kronProduct: one factor per particle required");
  Vec joint(space.dim());
  for (std::int64_t q = 0; q < space.dim(); ++q) {
    cxd v = 1.0;
    for (int p = 0; p < space.particles(); ++p)
      v *= factors[p][space.axisIndex(q, p)];
    joint[q] = v;
  }
  return joint;
}

BohmScenario makeFreePacketScenario() {
  BohmScenario s;
  s.name = "free-packet";
  s.space = std::make_shared<LatticeSpace>(1, 64, 0.125);
  s.metric = KineticMetric::standard(*s.space);
  s.dt = 4e-3;
  s.sampleTimes = {0.3, 0.6, 0.9, 1.2, 1.5};
  s.binning = Binning{64};

  double k0 = latticeMomentum(2, 64, 0.125);  // two wavelengths across L
  Vec packet = wrappedGaussian(64, 0.125, 2.0, 0.5, k0);
  Hamiltonian h = buildHamiltonian(*s.space, [](double) { return 0.0; });
  auto prop = std::make_shared<const Propagator>(h, s.dt);
  s.keepAlive.push_back(prop);

  EvolvingPure ev(*prop, packet);
  auto stateAt = [ev](double t) { return ev.at(t); };
  s.truthBranches = {{1.0, stateAt}};
  s.sampledBranches = {{1.0, stateAt}};
  s.branchWeights = {1.0};
  return s;
}

BohmScenario makeDoubleWellScenario() {
  BohmScenario s;
  s.name = "double-well";
  s.space = std::make_shared<LatticeSpace>(1, 64, 0.125);
  s.metric = KineticMetric::standard(*s.space);
  s.dt = 2e-3;
  s.sampleTimes = {0.4, 0.8, 1.2, 1.6, 2.0};
  s.binning = Binning{64};

  double L = s.space->length();
  double v0 = 10.0;
  Hamiltonian h = buildHamiltonian(*s.space, [L, v0](double x) {
    return 0.5 * v0 * (1.0 - std::cos(4.0 * M_PI * x / L));
  });
  Vec packet = wrappedGaussian(64, 0.125, 4.7, 0.35, 0.0);
  auto prop = std::make_shared<const Propagator>(h, s.dt);
  s.keepAlive.push_back(prop);

  EvolvingPure ev(*prop, packet);
  auto stateAt = [ev](double t) { return ev.at(t); };
  s.truthBranches = {{1.0, stateAt}};
  s.sampledBranches = {{1.0, stateAt}};
  s.branchWeights = {1.0};
  return s;
}

Sec52Scenario makeSec52Scenario(const Sec52Params& params) {
  Sec52Scenario sc;
  sc.params = params;
  int m = params.pointsPerAxis;
  double a = params.spacing;
  double L = m * a;
  double g = params.couplingStrength;

  sc.bohm.name = "sec52-momentum-mixture";
  sc.bohm.space = std::make_shared<LatticeSpace>(2, m, a);
  const LatticeSpace& space = *sc.bohm.space;

  // Kinetic form: p_x^2 / (2 m_x) + g p_x p_y (pointer with no kinetic term).
  RMat gmat(2, 2);
  gmat << 1.0 / space.mass(0), g, g, 0.0;
  sc.bohm.metric = KineticMetric::fromMatrix(gmat);

  sc.psiMinus = planeWaveVector(-params.momentumMode, m, a);
  sc.psiPlus = planeWaveVector(+params.momentumMode, m, a);
  sc.pointerReady = wrappedGaussian(m, a, 0.5 * L, params.pointerWidth);

  double kMinus = latticeMomentum(-params.momentumMode, m, a);
  double kPlus = latticeMomentum(+params.momentumMode, m, a);
  // Discrete kinetic eigenvalue of each momentum branch.
  auto kinetic = [&](double k) {
    return kHbar * kHbar / (space.mass(0) * a * a) * (1.0 - std::cos(k * a));
  };
  sc.pointerShift = std::abs(g * kHbar * kPlus * params.measurementTime);

  // Per-branch pointer Hamiltonian: eps_b + g hbar k_b P_y, spectral form.
  Mat dft = dftColumns(m, a);
  auto pointerProp = [&](double kBranch) {
    RVec eig(m);
    for (int n = 0; n < m; ++n)
      eig[n] = kinetic(kBranch) +
               g * kHbar * kBranch * kHbar * latticeMomentum(n, m, a);
    return std::make_shared<const Propagator>(dft, eig, params.dt);
  };
  auto propMinus = pointerProp(kMinus);
  auto propPlus = pointerProp(kPlus);
  sc.bohm.keepAlive.push_back(propMinus);
  sc.bohm.keepAlive.push_back(propPlus);

  EvolvingPure evMinus(*propMinus, sc.pointerReady);
  EvolvingPure evPlus(*propPlus, sc.pointerReady);
  sc.pointerMinusAt = [evMinus](double t) { return evMinus.at(t); };
  sc.pointerPlusAt = [evPlus](double t) { return evPlus.at(t); };

  auto spacePtr = sc.bohm.space;
  Vec psiMinus = sc.psiMinus;
  Vec psiPlus = sc.psiPlus;
  auto minusAt = sc.pointerMinusAt;
  auto plusAt = sc.pointerPlusAt;
  auto branchMinus = [spacePtr, psiMinus, minusAt](double t) {
    return kronProduct(*spacePtr, {psiMinus, minusAt(t)});
  };
  auto branchPlus = [spacePtr, psiPlus, plusAt](double t) {
    return kronProduct(*spacePtr, {psiPlus, plusAt(t)});
  };
  sc.bohm.truthBranches = {{0.5, branchMinus}, {0.5, branchPlus}};
  sc.bohm.sampledBranches = {{1.0, branchMinus}, {1.0, branchPlus}};
  sc.bohm.branchWeights = {0.5, 0.5};
  sc.bohm.dt = params.dt;
  sc.bohm.binning = Binning{params.binsPerAxis};
  sc.bohm.sampleTimes = {0.2 * params.measurementTime,
                         0.4 * params.measurementTime,
                         0.6 * params.measurementTime,
                         0.8 * params.measurementTime, params.measurementTime};

  sc.split = Splitting{{0}, {1}};

  // Record regions: the two half-circles around the displaced pointer
  // packets (minus branch moves toward smaller y for positive coupling).
  std::vector<std::int64_t> lower, upper;
  for (int j = 0; j < m; ++j)
    (j < m / 2 ? lower : upper).push_back(j);
  bool minusGoesDown = g * kHbar * kMinus < 0.0;
  sc.regions.epsilon = params.epsilon;
  sc.regions.regions = {
      {"psi-", minusGoesDown ? lower : upper},
      {"psi+", minusGoesDown ? upper : lower},
  };
  return sc;
}

Hamiltonian sec52DenseHamiltonian(const Sec52Params& params) {
  int m = params.pointsPerAxis;
  double a = params.spacing;
  LatticeSpace space(2, m, a);
  space.requireDense("sec52DenseHamiltonian");

  LatticeSpace axis(1, m, a);
  Hamiltonian hx = buildHamiltonian(axis, [](double) { return 0.0; });
  Mat px = spectralMomentum(m, a);
  Mat py = spectralMomentum(m, a);

  std::int64_t d = space.dim();
  Mat h = Mat::Zero(d, d);
  for (std::int64_t q = 0; q < d; ++q)
    for (std::int64_t qp = 0; qp < d; ++qp) {
      int x = space.axisIndex(q, 0), y = space.axisIndex(q, 1);
      int xp = space.axisIndex(qp, 0), yp = space.axisIndex(qp, 1);
      cxd v = 0.0;
      if (y == yp) v += hx.matrix(x, xp);
      v += params.couplingStrength * px(x, xp) * py(y, yp);
      h(q, qp) = v;
    }
  return Hamiltonian{std::move(h)};
}

GrwScenario makeGrwDiagramScenario() {
  auto space = std::make_shared<LatticeSpace>(1, 64, 0.125);
  double k = latticeMomentum(2, 64, 0.125);

  Hamiltonian h = buildHamiltonian(*space, [](double) { return 0.0; });
  auto prop = std::make_shared<const Propagator>(h, 0.01);

  PureState left(wrappedGaussian(64, 0.125, 2.5, 0.4, +k), space->cellVolume());
  PureState right(wrappedGaussian(64, 0.125, 5.5, 0.4, -k), space->cellVolume());
  std::vector<std::pair<double, PureState>> decomposition = {{0.5, left},
                                                             {0.5, right}};
  MixtureState mixture = MixtureState::fromDecomposition(decomposition);
  return GrwScenario{"grw-diagram",
                     space,
                     prop,
                     std::move(decomposition),
                     std::move(mixture),
                     GrwParams{1.2, 0.45},
                     2.0,
                     {0.4, 0.8, 1.2, 1.6, 2.0}};
}

LindbladScenario makeLindbladDephasingScenario(double gamma) {
  auto space = std::make_shared<LatticeSpace>(1, 64, 0.25);
  double L = space->length();
  double k0 = latticeMomentum(2, 64, 0.25);

  Hamiltonian h = buildHamiltonian(*space, [](double) { return 0.0; });
  auto prop = std::make_shared<const Propagator>(h, 0.01);
  PureState packet(wrappedGaussian(64, 0.25, 5.0, 1.0, k0),
                   space->cellVolume());

  // Position dephasing: L = x - L/2 (centered to keep the operator norm
  // small; the packet stays away from the wrap seam over the run).
  Mat l = Mat::Zero(64, 64);
  for (int j = 0; j < 64; ++j) l(j, j) = space->coordinate(j) - 0.5 * L;
  LindbladSpec spec;
  spec.jumpOperators = {std::move(l)};
  spec.rates = {gamma};
  return LindbladScenario{"lindblad-dephasing",
                          space,
                          std::move(h),
                          prop,
                          std::move(packet),
                          std::move(spec),
                          gamma,
                          2.0,
                          5e-3,
                          Binning{64}};
}

}  // namespace dmlab
