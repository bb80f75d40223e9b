#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmlab/presets.hpp"
#include "dmlab/subsystem.hpp"
#include "test_support.hpp"

using namespace dmlab;

namespace {

Sec52Params smallSec52() {
  Sec52Params p;
  p.pointsPerAxis = 16;
  p.spacing = 0.5;
  return p;
}

}  // namespace

TEST_CASE("splitting validation") {
  LatticeSpace space(3, 4, 0.5);
  CHECK_THROWS_AS(Splitting({}, {0, 1, 2}).validate(space), ValidationError);
  CHECK_THROWS_AS(Splitting({0, 1}, {1, 2}).validate(space), ValidationError);
  CHECK_THROWS_AS(Splitting({0}, {1}).validate(space), ValidationError);
  CHECK_NOTHROW(Splitting({0, 2}, {1}).validate(space));
}

TEST_CASE("conditional state of a product kernel is the subsystem factor") {
  LatticeSpace space(2, 8, 0.5);
  Vec sub = wrappedGaussian(8, 0.5, 1.5, 0.6, latticeMomentum(1, 8, 0.5));
  Vec env = wrappedGaussian(8, 0.5, 2.5, 0.7, 0.0);
  PureState joint(kronProduct(space, {sub, env}), space.cellVolume());
  SplitIndex split(space, {{0}, {1}});

  DensityMatrix w = pureToDensity(joint);
  for (double y : {1.5, 2.6, 3.4}) {
    RVec yv(1);
    yv[0] = y;
    ConditionalState cond = conditionalDensityMatrix(w, split, yv);
    Mat expected = sub * sub.adjoint();
    expected /= 0.5 * expected.trace().real();
    CHECK((cond.w.entries() - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(cond.w.purity() == doctest::Approx(1.0).epsilon(1e-10));
  }

  // Environment point with no support raises the null-support error.
  Vec lump = Vec::Zero(8);
  lump[2] = 1.0;
  PureState isolated(kronProduct(space, {sub, lump / std::sqrt(0.5)}),
                     space.cellVolume());
  RVec far(1);
  far[0] = space.coordinate(6);
  CHECK_THROWS_AS(conditionalDensityMatrix(pureToDensity(isolated), split, far),
                  ValidationError);
}

TEST_CASE("pre-measurement conditional state is the equal momentum mixture") {
  Sec52Scenario sc = makeSec52Scenario(smallSec52());
  const LatticeSpace& space = *sc.bohm.space;
  MixtureState mixture(
      {{0.5, kronProduct(space, {sc.psiMinus, sc.pointerReady})},
       {0.5, kronProduct(space, {sc.psiPlus, sc.pointerReady})}},
      space.cellVolume());
  SplitIndex split(space, sc.split);

  RVec y(1);
  y[0] = 0.5 * space.length();  // center of the ready packet
  ConditionalState cond = conditionalDensityMatrix(mixture, split, y);

  Mat expected = 0.5 * (sc.psiMinus * sc.psiMinus.adjoint()) +
                 0.5 * (sc.psiPlus * sc.psiPlus.adjoint());
  CHECK((cond.w.entries() - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(cond.w.purity() == doctest::Approx(0.5).epsilon(1e-9));

  // Dense path agrees with the branch path.
  ConditionalState dense =
      conditionalDensityMatrix(mixture.toDensity(), split, y);
  CHECK((dense.w.entries() - cond.w.entries()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("post-measurement conditional state is pure") {
  Sec52Scenario sc = makeSec52Scenario(smallSec52());
  const LatticeSpace& space = *sc.bohm.space;
  double t2 = sc.params.measurementTime;
  Vec phiMinus = sc.pointerMinusAt(t2);
  Vec phiPlus = sc.pointerPlusAt(t2);
  MixtureState mixture({{0.5, kronProduct(space, {sc.psiMinus, phiMinus})},
                        {0.5, kronProduct(space, {sc.psiPlus, phiPlus})}},
                       space.cellVolume());
  SplitIndex split(space, sc.split);

  // Find where the minus-record packet actually sits.
  int peak = 0;
  for (int j = 0; j < space.pointsPerAxis(); ++j)
    if (std::norm(phiMinus[j]) > std::norm(phiMinus[peak])) peak = j;
  RVec y(1);
  y[0] = space.coordinate(peak);
  ConditionalState cond = conditionalDensityMatrix(mixture, split, y);
  CHECK(cond.w.purity() >= 0.99);
  CHECK(fidelityWithPure(cond.w, PureState(sc.psiMinus, space.spacing())) >=
        0.99);
}

TEST_CASE("conditional probability equals the renormalized joint diagonal") {
  std::mt19937_64 g(307);
  LatticeSpace space(2, 6, 0.4);
  SplitIndex split(space, {{0}, {1}});
  for (int trial = 0; trial < 5; ++trial) {
    DensityMatrix w =
        test::randomDensityMatrix(space.dim(), space.cellVolume(), g, 8);
    RVec joint = diagonalDistribution(w);
    for (int yCell = 0; yCell < 6; ++yCell) {
      RVec y(1);
      y[0] = space.coordinate(yCell);
      ConditionalState cond = conditionalDensityMatrix(w, split, y);
      RVec p = conditionalProbability(cond);

      // Brute force: joint diagonal restricted to this environment cell.
      RVec row(6);
      for (int x = 0; x < 6; ++x) row[x] = joint[split.flat(x, yCell)];
      row /= row.sum();
      CHECK((p - row).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("plane-wave mixture has a flat conditional probability") {
  Sec52Scenario sc = makeSec52Scenario(smallSec52());
  const LatticeSpace& space = *sc.bohm.space;
  MixtureState mixture(
      {{0.5, kronProduct(space, {sc.psiMinus, sc.pointerReady})},
       {0.5, kronProduct(space, {sc.psiPlus, sc.pointerReady})}},
      space.cellVolume());
  SplitIndex split(space, sc.split);
  RVec y(1);
  y[0] = 0.5 * space.length();
  RVec p = conditionalProbability(conditionalDensityMatrix(mixture, split, y));
  for (int x = 0; x < space.pointsPerAxis(); ++x)
    CHECK(p[x] == doctest::Approx(1.0 / 16.0).epsilon(1e-10));
}

TEST_CASE("pure-kernel conditional state is the conditional wave function") {
  std::mt19937_64 g(311);
  LatticeSpace space(2, 6, 0.5);
  SplitIndex split(space, {{0}, {1}});
  PureState joint = test::randomPureState(space.dim(), space.cellVolume(), g);
  DensityMatrix w = pureToDensity(joint);
  for (int yCell : {0, 2, 5}) {
    RVec y(1);
    y[0] = space.coordinate(yCell);
    ConditionalState cond = conditionalDensityMatrix(w, split, y);
    CHECK(cond.w.purity() == doctest::Approx(1.0).epsilon(1e-10));
    Vec slice(6);
    for (int x = 0; x < 6; ++x)
      slice[x] = joint.amplitudes()[split.flat(x, yCell)];
    slice /= std::sqrt(0.5 * slice.squaredNorm());
    Mat expected = slice * slice.adjoint();
    CHECK((cond.w.entries() - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("detectEffectiveState on products, records, and overlaps") {
  Sec52Scenario sc = makeSec52Scenario(smallSec52());
  const LatticeSpace& space = *sc.bohm.space;
  SplitIndex split(space, sc.split);
  double t2 = sc.params.measurementTime;
  Vec phiMinus = sc.pointerMinusAt(t2);
  Vec phiPlus = sc.pointerPlusAt(t2);

  // Exact product: factor recovered, residual at rounding level.
  DensityMatrix product = pureToDensity(
      PureState(kronProduct(space, {sc.psiMinus, sc.pointerReady}),
                space.cellVolume()));
  MacroRegionSet oneRegion;
  oneRegion.epsilon = 1e-6;
  std::vector<std::int64_t> all;
  for (int j = 0; j < 16; ++j) all.push_back(j);
  oneRegion.regions = {{"everything", all}};
  RVec y(1);
  y[0] = 0.5 * space.length();
  auto eff = detectEffectiveState(product, split, y, oneRegion);
  REQUIRE(eff.has_value());
  CHECK(eff->regionLabel == "everything");
  CHECK(eff->factorResidual < 1e-9);
  Mat rhoExpected = sc.psiMinus * sc.psiMinus.adjoint();
  rhoExpected /= 0.5 * rhoExpected.trace().real();
  CHECK((eff->rho.entries() - rhoExpected).cwiseAbs().maxCoeff() < 1e-8);

  // Post-measurement kernel with the scenario's record regions.
  MixtureState recorded({{0.5, kronProduct(space, {sc.psiMinus, phiMinus})},
                         {0.5, kronProduct(space, {sc.psiPlus, phiPlus})}},
                        space.cellVolume());
  DensityMatrix wT2 = recorded.toDensity();
  int peak = 0;
  for (int j = 0; j < 16; ++j)
    if (std::norm(phiMinus[j]) > std::norm(phiMinus[peak])) peak = j;
  RVec yMinus(1);
  yMinus[0] = space.coordinate(peak);
  auto effMinus = detectEffectiveState(wT2, split, yMinus, sc.regions);
  REQUIRE(effMinus.has_value());
  CHECK(effMinus->regionLabel == "psi-");
  CHECK(fidelityWithPure(effMinus->rho,
                         PureState(sc.psiMinus, space.spacing())) >= 0.99);

  // The effective state refines the conditional state.
  ConditionalState cond = conditionalDensityMatrix(wT2, split, yMinus);
  CHECK(traceDistance(effMinus->rho, cond.w) <= sc.regions.epsilon + 1e-10);

  // Overlapping records merged into one region: no product structure.
  Sec52Params overlapping = smallSec52();
  overlapping.couplingStrength *= 0.05;  // records barely separate
  Sec52Scenario sc2 = makeSec52Scenario(overlapping);
  Vec phiM2 = sc2.pointerMinusAt(t2);
  Vec phiP2 = sc2.pointerPlusAt(t2);
  MixtureState blurred({{0.5, kronProduct(space, {sc2.psiMinus, phiM2})},
                        {0.5, kronProduct(space, {sc2.psiPlus, phiP2})}},
                       space.cellVolume());
  auto effBlurred =
      detectEffectiveState(blurred.toDensity(), split, y, oneRegion);
  CHECK(!effBlurred.has_value());

  // Environment point outside every declared region.
  MacroRegionSet partial;
  partial.epsilon = 1e-6;
  partial.regions = {{"low", {0, 1, 2, 3}}};
  RVec outside(1);
  outside[0] = space.coordinate(10);
  CHECK_THROWS_AS(detectEffectiveState(wT2, split, outside, partial),
                  ValidationError);
}

TEST_CASE("jitter sensitivity vanishes for product kernels") {
  Sec52Scenario sc = makeSec52Scenario(smallSec52());
  const LatticeSpace& space = *sc.bohm.space;
  MixtureState mixture(
      {{0.5, kronProduct(space, {sc.psiMinus, sc.pointerReady})},
       {0.5, kronProduct(space, {sc.psiPlus, sc.pointerReady})}},
      space.cellVolume());
  SplitIndex split(space, sc.split);
  RVec y(1);
  y[0] = 0.5 * space.length() + 0.2;
  // Conditioning anywhere in the support of a product kernel gives the same
  // subsystem state, so the two bracketing cells agree exactly.
  CHECK(conditionJitterSensitivity(mixture, split, y) < 1e-10);
}

TEST_CASE("product-branch evolution matches the dense joint propagator") {
  Sec52Params params = smallSec52();
  Sec52Scenario sc = makeSec52Scenario(params);
  const LatticeSpace& space = *sc.bohm.space;
  Hamiltonian joint = sec52DenseHamiltonian(params);
  Propagator prop(joint, 0.05);

  for (double t : {0.3, 0.7}) {
    Vec viaProduct = kronProduct(space, {sc.psiMinus, sc.pointerMinusAt(t)});
    Vec viaDense = prop.evolveVector(
        kronProduct(space, {sc.psiMinus, sc.pointerReady}), t);
    CHECK((viaProduct - viaDense).cwiseAbs().maxCoeff() < 1e-9);

    Vec viaProductPlus = kronProduct(space, {sc.psiPlus, sc.pointerPlusAt(t)});
    Vec viaDensePlus = prop.evolveVector(
        kronProduct(space, {sc.psiPlus, sc.pointerReady}), t);
    CHECK((viaProductPlus - viaDensePlus).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("scenario guiding field matches the dense kernel field") {
  Sec52Params params = smallSec52();
  Sec52Scenario sc = makeSec52Scenario(params);
  const LatticeSpace& space = *sc.bohm.space;
  double t = 0.4;

  std::vector<WeightedVector> snapshot;
  for (const auto& b : sc.bohm.truthBranches)
    snapshot.push_back({b.weight, b.stateAt(t)});
  VelocityField viaBranches = buildField(space, sc.bohm.metric, snapshot, t);

  MixtureState mix(snapshot, space.cellVolume());
  VelocityField viaDense = buildField(space, sc.bohm.metric, mix.toDensity(), t);
  for (int axis = 0; axis < 2; ++axis)
    CHECK((viaBranches.v[axis] - viaDense.v[axis]).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("measurement demo: frequencies, purities, flags") {
  DemoParams params;
  params.runs = 200;
  params.seed = 91;
  DemoReport rep = measurementDemo(params);

  CHECK(rep.flaggedCount == 0);
  CHECK(rep.maxPreDeviation < 1e-6);
  CHECK(rep.minPostPurity >= 0.99);
  CHECK(std::abs(rep.kernelFreqMinus - 0.5) < 0.15);
  CHECK(std::abs(rep.kernelFreqMinus - rep.pureFreqMinus) <
        2.0 / std::sqrt(200.0) + 0.05);
  CHECK(rep.pointerOverlapMass < params.epsilon);
  for (const auto& r : rep.pureRuns) {
    CHECK(r.prePurity == 1.0);
    CHECK(r.postPurity == 1.0);
  }
  // The kernel runs transition mixed -> pure.
  for (const auto& r : rep.kernelRuns) {
    if (r.flagged) continue;
    CHECK(r.prePurity == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.postPurity >= 0.99);
  }
}

TEST_CASE("measurement demo rejects overlapping pointer records") {
  DemoParams params;
  params.runs = 10;
  params.couplingStrength *= 0.05;  // records stay on top of each other
  CHECK_THROWS_AS(measurementDemo(params), ConfigError);
}
