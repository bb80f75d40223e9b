#pragma once

// Shared helpers and independent oracles for the test suites. Oracles here
// deliberately avoid the library's implementation paths: matrix exponentials
// use scaling-and-squaring instead of the eigendecomposition propagator,
// trace norms use brute-force SVD instead of Hermitian spectra, and ground
// energies use shifted power iteration on the raw stencil.

#include <cmath>
#include <random>
#include <vector>

#include "dmlab/lattice.hpp"
#include "dmlab/rng.hpp"
#include "dmlab/states.hpp"

namespace dmlab::test {

// Random unit-norm state under the carried measure.
inline PureState randomPureState(std::int64_t dim, double cell,
                                 std::mt19937_64& g) {
  Vec amp(dim);
  for (std::int64_t i = 0; i < dim; ++i) amp[i] = complexNormalSample(g);
  return PureState::normalized(std::move(amp), cell);
}

// Random full-rank mixed state (Wishart-style), measure-normalized.
inline DensityMatrix randomDensityMatrix(std::int64_t dim, double cell,
                                         std::mt19937_64& g, int rank = 0) {
  if (rank <= 0) rank = static_cast<int>(dim);
  Mat a(dim, rank);
  for (std::int64_t i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = complexNormalSample(g);
  Mat w = a * a.adjoint();
  w /= cell * w.trace().real();
  return DensityMatrix::fromMatrix(std::move(w), cell);
}

// Matrix exponential by scaling and squaring on a plain Taylor series;
// independent of any eigendecomposition.
inline Mat expmTaylor(const Mat& m) {
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  Mat x = m * scale;
  Mat term = Mat::Identity(m.rows(), m.cols());
  Mat sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Trace norm via brute-force singular values.
inline double traceNormSvd(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

// Ground-state energy of the periodic kinetic-plus-potential stencil by
// shifted power iteration, never assembling the Hamiltonian matrix.
inline double groundEnergyStencil(const LatticeSpace& space,
                                  const std::vector<double>& potential,
                                  int iterations = 40000) {
  std::int64_t d = space.dim();
  double shift = 0.0;
  for (double v : potential) shift = std::max(shift, v);
  for (int p = 0; p < space.particles(); ++p)
    shift += 2.0 * kHbar * kHbar /
             (space.mass(p) * space.spacing() * space.spacing());

  auto applyH = [&](const Vec& in, Vec& out) {
    out.setZero();
    for (int p = 0; p < space.particles(); ++p) {
      double t = kHbar * kHbar /
                 (2.0 * space.mass(p) * space.spacing() * space.spacing());
      for (std::int64_t i = 0; i < d; ++i)
        out[i] += t * (2.0 * in[i] - in[space.neighbor(i, p, +1)] -
                       in[space.neighbor(i, p, -1)]);
    }
    for (std::int64_t i = 0; i < d; ++i) out[i] += potential[i] * in[i];
  };

  std::mt19937_64 g(12345);
  Vec v(d), hv(d);
  for (std::int64_t i = 0; i < d; ++i) v[i] = complexNormalSample(g);
  v /= v.norm();
  for (int it = 0; it < iterations; ++it) {
    applyH(v, hv);
    Vec next = shift * v - hv;  // power iteration on (shift - H)
    v = next / next.norm();
  }
  applyH(v, hv);
  return v.dot(hv).real() / v.squaredNorm();
}

}  // namespace dmlab::test
