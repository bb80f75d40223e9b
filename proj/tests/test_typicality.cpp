#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmlab/stats.hpp"
#include "dmlab/typicality.hpp"
#include "test_support.hpp"

using namespace dmlab;

TEST_CASE("one-dimensional subspaces sample a fixed ray") {
  std::mt19937_64 g(401);
  Mat basis(6, 1);
  for (int i = 0; i < 6; ++i) basis(i, 0) = complexNormalSample(g);
  basis.col(0).normalize();
  SubspaceConstraint c = SubspaceConstraint::fromBasis(2, 3, basis);
  for (int trial = 0; trial < 10; ++trial) {
    PureState psi = sampleHaar(c, g);
    // Equal up to a global phase.
    cxd overlap = basis.col(0).dot(psi.amplitudes());
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
  }
  // D = 0 exactly: the sample is the subspace.
  DensityMatrix rhoRef = reduceToSubsystem(normalizedProjection(c), 2, 3);
  PureState psi = sampleHaar(c, g);
  CHECK(traceDistance(reduceToSubsystem(psi, 2, 3), rhoRef) < 1e-12);
}

TEST_CASE("Haar samples are exchangeable across basis directions") {
  std::mt19937_64 g(405);
  std::int64_t draws = 100000;
  RVec mean = RVec::Zero(4);
  for (std::int64_t i = 0; i < draws; ++i) {
    Vec z(4);
    for (int k = 0; k < 4; ++k) z[k] = complexNormalSample(g);
    z /= z.norm();
    // Coefficients against the subspace basis are the normalized Gaussians
    // themselves; no need to expand into the ambient space.
    for (int k = 0; k < 4; ++k) mean[k] += std::norm(z[k]);
  }
  mean /= static_cast<double>(draws);
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(mean[k] - 0.25) < 0.01 * 0.25 + 0.003);
}

TEST_CASE("normalizedProjection: full space, ray, flat spectrum") {
  SubspaceConstraint full = SubspaceConstraint::fullSpace(3, 4);
  DensityMatrix wr = normalizedProjection(full);
  CHECK((wr.entries() - Mat::Identity(12, 12) / 12.0).cwiseAbs().maxCoeff() <
        1e-14);

  std::mt19937_64 g(407);
  SubspaceConstraint ray =
      buildSubspace(SubspaceRule::kRandomSubspace, 3, 4, 1, g);
  DensityMatrix pure = normalizedProjection(ray);
  CHECK(pure.purity() == doctest::Approx(1.0).epsilon(1e-10));

  SubspaceConstraint sub =
      buildSubspace(SubspaceRule::kRandomSubspace, 3, 4, 5, g);
  CHECK(normalizedProjection(sub).purity() ==
        doctest::Approx(1.0 / 5.0).epsilon(1e-10));

  // Idempotence of r * W_R.
  Mat p = 5.0 * normalizedProjection(sub).entries();
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reduceToSubsystem: products, maximal entanglement, observables") {
  std::mt19937_64 g(409);
  // Product state reduces to the subsystem factor.
  Vec a(3), b(5);
  for (int i = 0; i < 3; ++i) a[i] = complexNormalSample(g);
  for (int i = 0; i < 5; ++i) b[i] = complexNormalSample(g);
  a.normalize();
  b.normalize();
  Vec joint(15);
  for (int s = 0; s < 3; ++s)
    for (int e = 0; e < 5; ++e) joint[s * 5 + e] = a[s] * b[e];
  DensityMatrix rho = reduceToSubsystem(PureState(joint, 1.0), 3, 5);
  CHECK((rho.entries() - a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  // Maximally entangled state reduces to the flat state.
  int d = 4;
  Vec bell = Vec::Zero(d * d);
  for (int s = 0; s < d; ++s) bell[s * d + s] = 1.0 / std::sqrt(double(d));
  DensityMatrix flat = reduceToSubsystem(PureState(bell, 1.0), d, d);
  CHECK((flat.entries() - Mat::Identity(d, d) / d).cwiseAbs().maxCoeff() <
        1e-12);

  // Defining property: tr(rho_S A) = tr(W (A (x) I)).
  DensityMatrix w = test::randomDensityMatrix(12, 1.0, g, 6);
  DensityMatrix rs = reduceToSubsystem(w, 3, 4);
  for (int trial = 0; trial < 20; ++trial) {
    Mat obs(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) obs(i, j) = complexNormalSample(g);
    obs = 0.5 * (obs + Mat(obs.adjoint()));
    Mat lifted = Mat::Zero(12, 12);
    for (int s = 0; s < 3; ++s)
      for (int sp = 0; sp < 3; ++sp)
        for (int e = 0; e < 4; ++e)
          lifted(s * 4 + e, sp * 4 + e) = obs(s, sp);
    cxd lhs = (rs.entries() * obs).trace();
    cxd rhs = (w.entries() * lifted).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }

  CHECK_THROWS_AS(reduceToSubsystem(w, 5, 3), ValidationError);
}

TEST_CASE("partial trace is linear in the mixture") {
  std::mt19937_64 g(411);
  PureState p1 = test::randomPureState(12, 1.0, g);
  PureState p2 = test::randomPureState(12, 1.0, g);
  DensityMatrix mixed = mixDensity({{0.3, p1}, {0.7, p2}});
  Mat lhs = reduceToSubsystem(mixed, 3, 4).entries();
  Mat rhs = 0.3 * reduceToSubsystem(p1, 3, 4).entries() +
            0.7 * reduceToSubsystem(p2, 3, 4).entries();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("typicality breaks down without a large environment") {
  auto rows = typicalityExperiment(2, {2}, SubspaceRule::kFullSpace, 200, 611);
  CHECK(rows[0].meanD > 0.1);  // order one, not small
}

TEST_CASE("mean distance decreases as the environment grows") {
  auto rows = typicalityExperiment(4, {16, 64, 256}, SubspaceRule::kFullSpace,
                                   200, 613);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].meanD > rows[1].meanD);
  CHECK(rows[1].meanD > rows[2].meanD);
  // Scaling is roughly sqrt(dS/dE): two dimension quadruplings shrink the
  // mean by about 4x.
  CHECK(rows[2].meanD < 0.35 * rows[0].meanD);
}

TEST_CASE("typicality statistics are thread-count invariant") {
  auto one = typicalityExperiment(4, {16, 64}, SubspaceRule::kRandomSubspace,
                                  100, 617, 1);
  auto four = typicalityExperiment(4, {16, 64}, SubspaceRule::kRandomSubspace,
                                   100, 617, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].meanD == four[i].meanD);
    CHECK(one[i].maxD == four[i].maxD);
    CHECK(one[i].stdD == four[i].stdD);
  }
}

TEST_CASE("Monte Carlo average of rays converges to the projection") {
  std::mt19937_64 g(419);
  SubspaceConstraint c =
      buildSubspace(SubspaceRule::kRandomSubspace, 4, 4, 8, g);
  // 1e4 draws put the average within 0.05 of W_R for r <= 16.
  std::vector<double> d = haarAverageConvergence(c, {10000}, 4211);
  CHECK(d[0] < 0.05);

  // Log-log slope of the convergence is -1/2.
  SubspaceConstraint small = SubspaceConstraint::fullSpace(8, 1);
  std::vector<std::int64_t> counts = {50, 200, 800, 3200, 12800};
  std::vector<double> dist = haarAverageConvergence(small, counts, 4212);
  std::vector<double> xs(counts.begin(), counts.end());
  double slope = fitLogLogSlope(xs, dist);
  CHECK(std::abs(slope + 0.5) < 0.15);
}

TEST_CASE("Haar sampling is invariant under subspace rotations") {
  std::mt19937_64 g(421);
  SubspaceConstraint c =
      buildSubspace(SubspaceRule::kRandomSubspace, 4, 16, 32, g);

  // Rotate the basis by a Haar unitary of the subspace.
  Mat z(32, 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) z(i, j) = complexNormalSample(g);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  SubspaceConstraint rotated =
      SubspaceConstraint::fromBasis(4, 16, c.basis() * q);

  DensityMatrix ref = reduceToSubsystem(normalizedProjection(c), 4, 16);
  auto drawDs = [&](const SubspaceConstraint& cc, std::uint64_t seed) {
    std::vector<double> ds;
    for (int i = 0; i < 200; ++i) {
      std::mt19937_64 gg(deriveSeed(seed, i));
      ds.push_back(
          traceDistance(reduceToSubsystem(sampleHaar(cc, gg), 4, 16), ref));
    }
    return ds;
  };
  KsResult ks = ksTwoSample(drawDs(c, 5001), drawDs(rotated, 5002));
  CHECK(ks.pValue > 0.01);
}

TEST_CASE("energy-shell subspaces are valid constraints") {
  std::mt19937_64 g(423);
  SubspaceConstraint shell =
      buildSubspace(SubspaceRule::kEnergyShell, 2, 4, 3, g);
  CHECK(shell.subspaceDim() == 3);
  Mat gram = shell.basis().adjoint() * shell.basis();
  CHECK((gram - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_NOTHROW(sampleHaar(shell, g));
}

TEST_CASE("typicality CSV table has the fixed schema") {
  auto rows = typicalityExperiment(2, {4}, SubspaceRule::kFullSpace, 10, 631);
  std::string csv = typicalityCsv(rows);
  CHECK(csv.rfind("d_S,d_E,r,samples,mean_D,max_D,std_D,seed\n", 0) == 0);
  CHECK(csv.find("2,4,8,10,") != std::string::npos);
}

TEST_CASE("abstract-state guard: lattice measures are rejected") {
  std::mt19937_64 g(433);
  DensityMatrix w = test::randomDensityMatrix(6, 0.5, g);
  CHECK_THROWS_AS(reduceToSubsystem(w, 2, 3), ValidationError);
}
