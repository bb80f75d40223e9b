#include "dmlab/typicality.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "dmlab/rng.hpp"
#include "dmlab/stats.hpp"
#include "dmlab/threads.hpp"

namespace dmlab {

SubspaceConstraint SubspaceConstraint::fullSpace(std::int64_t dimS,
                                                 std::int64_t dimE) {
  if (dimS < 1 || dimE < 1)
    throw ValidationError("SubspaceConstraint: dimensions must be >= 1");
  SubspaceConstraint c;
  c.dimS_ = dimS;
  c.dimE_ = dimE;
  c.r_ = dimS * dimE;
  return c;
}

SubspaceConstraint SubspaceConstraint::fromBasis(std::int64_t dimS,
                                                 std::int64_t dimE, Mat basis) {
  if (dimS < 1 || dimE < 1)
    throw ValidationError("SubspaceConstraint: dimensions must be >= 1");
  if (basis.rows() != dimS * dimE)
    throw ValidationError("SubspaceConstraint: basis rows != ambient dim");
  if (basis.cols() < 1 || basis.cols() > basis.rows())
    throw ValidationError("SubspaceConstraint: 1 <= r <= ambient required");
  Mat gram = basis.adjoint() * basis;
  double dev = (gram - Mat::Identity(basis.cols(), basis.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (dev > 1e-10)
    throw ValidationError("SubspaceConstraint: columns not orthonormal");
  SubspaceConstraint c;
  c.dimS_ = dimS;
  c.dimE_ = dimE;
  c.r_ = basis.cols();
  c.basis_ = std::move(basis);
  return c;
}

PureState sampleHaar(const SubspaceConstraint& constraint, std::mt19937_64& g) {
  std::int64_t r = constraint.subspaceDim();
  Vec z(r);
  for (std::int64_t i = 0; i < r; ++i) z[i] = complexNormalSample(g);
  z /= z.norm();
  if (constraint.isFullSpace()) return PureState(std::move(z), 1.0);
  return PureState(constraint.basis() * z, 1.0);
}

DensityMatrix normalizedProjection(const SubspaceConstraint& constraint) {
  std::int64_t d = constraint.ambientDim();
  if (d > kDenseDimLimit)
    throw ResourceError("normalizedProjection: ambient dimension too large");
  if (constraint.isFullSpace())
    return DensityMatrix::maximallyMixed(d, 1.0);
  Mat w = constraint.basis() * constraint.basis().adjoint() /
          static_cast<double>(constraint.subspaceDim());
  return DensityMatrix::trusted(std::move(w), 1.0);
}

DensityMatrix reduceToSubsystem(const PureState& psi, std::int64_t dimS,
                                std::int64_t dimE) {
  if (psi.dim() != dimS * dimE)
    throw ValidationError("reduceToSubsystem: dimension does not factorize");
  if (psi.cellVolume() != 1.0)
    throw ValidationError("reduceToSubsystem: abstract (unit-measure) states only");
  Mat rho = Mat::Zero(dimS, dimS);
  const Vec& a = psi.amplitudes();
  // rho_S(s,s') = sum_e psi(s,e) conj(psi(s',e)); index = s*dimE + e.
  for (std::int64_t s = 0; s < dimS; ++s)
    for (std::int64_t sp = 0; sp <= s; ++sp) {
      cxd acc = 0.0;
      for (std::int64_t e = 0; e < dimE; ++e)
        acc += a[s * dimE + e] * std::conj(a[sp * dimE + e]);
      rho(s, sp) = acc;
      rho(sp, s) = std::conj(acc);
    }
  return DensityMatrix::trusted(std::move(rho), 1.0);
}

DensityMatrix reduceToSubsystem(const DensityMatrix& w, std::int64_t dimS,
                                std::int64_t dimE) {
  if (w.dim() != dimS * dimE)
    throw ValidationError("reduceToSubsystem: dimension does not factorize");
  if (w.cellVolume() != 1.0)
    throw ValidationError("reduceToSubsystem: abstract (unit-measure) states only");
  Mat rho = Mat::Zero(dimS, dimS);
  for (std::int64_t s = 0; s < dimS; ++s)
    for (std::int64_t sp = 0; sp < dimS; ++sp) {
      cxd acc = 0.0;
      for (std::int64_t e = 0; e < dimE; ++e)
        acc += w.entries()(s * dimE + e, sp * dimE + e);
      rho(s, sp) = acc;
    }
  rho = 0.5 * (rho + Mat(rho.adjoint()));
  return DensityMatrix::trusted(std::move(rho), 1.0);
}

SubspaceConstraint buildSubspace(SubspaceRule rule, std::int64_t dimS,
                                 std::int64_t dimE, std::int64_t r,
                                 std::mt19937_64& g) {
  std::int64_t d = dimS * dimE;
  switch (rule) {
    case SubspaceRule::kFullSpace:
      return SubspaceConstraint::fullSpace(dimS, dimE);
    case SubspaceRule::kRandomSubspace: {
      if (r < 1 || r > d)
        throw ValidationError("buildSubspace: 1 <= r <= ambient required");
      Mat z(d, r);
      for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < r; ++j) z(i, j) = complexNormalSample(g);
      Eigen::HouseholderQR<Mat> qr(z);
      Mat q = Mat(qr.householderQ()).leftCols(r);
      return SubspaceConstraint::fromBasis(dimS, dimE, std::move(q));
    }
    case SubspaceRule::kEnergyShell: {
      if (r < 1 || r > d)
        throw ValidationError("buildSubspace: 1 <= r <= ambient required");
      // Random GUE-like Hermitian operator; keep the r eigenvectors closest
      // to the spectrum median (a central energy window).
      Mat h(d, d);
      for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) h(i, j) = complexNormalSample(g);
      h = 0.5 * (h + Mat(h.adjoint()));
      Eigen::SelfAdjointEigenSolver<Mat> es(h);
      double median = es.eigenvalues()[d / 2];
      std::vector<std::int64_t> order(d);
      for (std::int64_t i = 0; i < d; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::int64_t a, std::int64_t b) {
                         return std::abs(es.eigenvalues()[a] - median) <
                                std::abs(es.eigenvalues()[b] - median);
                       });
      Mat basis(d, r);
      std::vector<std::int64_t> kept(order.begin(), order.begin() + r);
      std::sort(kept.begin(), kept.end());
      for (std::int64_t j = 0; j < r; ++j)
        basis.col(j) = es.eigenvectors().col(kept[j]);
      return SubspaceConstraint::fromBasis(dimS, dimE, std::move(basis));
    }
  }
  throw ValidationError("buildSubspace: unknown rule");
}

std::vector<TypicalityRow> typicalityExperiment(
    std::int64_t dimS, const std::vector<std::int64_t>& dimEs,
    SubspaceRule rule, std::int64_t samples, std::uint64_t seed, int threads) {
  std::vector<TypicalityRow> rows;
  int nThreads = resolveThreadCount(threads);
  for (std::size_t e = 0; e < dimEs.size(); ++e) {
    std::int64_t dimE = dimEs[e];
    if (dimS > dimE)
      throw ValidationError(
          "typicalityExperiment: small-subsystem regime requires dS <= dE");
    std::uint64_t rowSeed = deriveSeed(seed, e);
    std::mt19937_64 setup(deriveSeed(rowSeed, 0xFFFF));
    std::int64_t r = dimS * dimE;  // full-space default
    if (rule != SubspaceRule::kFullSpace) r = std::max<std::int64_t>(1, r / 2);
    SubspaceConstraint constraint = buildSubspace(rule, dimS, dimE, r, setup);

    DensityMatrix rhoRef = [&] {
      if (constraint.isFullSpace())
        return DensityMatrix::maximallyMixed(dimS, 1.0);
      // tr_E (B B^dagger) / r without forming the ambient kernel.
      Mat rho = Mat::Zero(dimS, dimS);
      const Mat& b = constraint.basis();
      for (std::int64_t col = 0; col < b.cols(); ++col)
        for (std::int64_t s = 0; s < dimS; ++s)
          for (std::int64_t sp = 0; sp < dimS; ++sp) {
            cxd acc = 0.0;
            for (std::int64_t ee = 0; ee < dimE; ++ee)
              acc += b(s * dimE + ee, col) * std::conj(b(sp * dimE + ee, col));
            rho(s, sp) += acc / static_cast<double>(constraint.subspaceDim());
          }
      rho = 0.5 * (rho + Mat(rho.adjoint()));
      return DensityMatrix::trusted(std::move(rho), 1.0);
    }();

    std::vector<double> d(samples);
    parallelFor(samples, nThreads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t i = lo; i < hi; ++i) {
        std::mt19937_64 g(deriveSeed(rowSeed, i));
        PureState psi = sampleHaar(constraint, g);
        d[i] = traceDistance(reduceToSubsystem(psi, dimS, dimE), rhoRef);
      }
    });

    SampleStats stats = summarize(d);
    rows.push_back({dimS, dimE, constraint.subspaceDim(), samples, stats.mean,
                    stats.max, stats.stddev, rowSeed});
  }
  return rows;
}

std::vector<double> haarAverageConvergence(
    const SubspaceConstraint& constraint, const std::vector<std::int64_t>& counts,
    std::uint64_t seed) {
  if (counts.empty()) return {};
  DensityMatrix wr = normalizedProjection(constraint);
  std::int64_t d = constraint.ambientDim();
  Mat running = Mat::Zero(d, d);
  std::vector<double> out;
  std::int64_t drawn = 0;
  for (std::int64_t target : counts) {
    if (target <= drawn)
      throw ValidationError("haarAverageConvergence: counts must ascend");
    for (; drawn < target; ++drawn) {
      std::mt19937_64 g(deriveSeed(seed, drawn));
      PureState psi = sampleHaar(constraint, g);
      running.noalias() += psi.amplitudes() * psi.amplitudes().adjoint();
    }
    Mat avg = running / static_cast<double>(drawn);
    avg = 0.5 * (avg + Mat(avg.adjoint()));
    out.push_back(traceDistance(DensityMatrix::trusted(avg, 1.0), wr));
  }
  return out;
}

std::string typicalityCsv(const std::vector<TypicalityRow>& rows) {
  std::string out = "d_S,d_E,r,samples,mean_D,max_D,std_D,seed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                  ",%.17g,%.17g,%.17g,%" PRIu64 "\n",
                  r.dimS, r.dimE, r.r, r.samples, r.meanD, r.maxD, r.stdD,
                  r.seed);
    out += buf;
  }
  return out;
}

}  // namespace dmlab
