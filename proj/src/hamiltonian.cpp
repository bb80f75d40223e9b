#include "dmlab/hamiltonian.hpp"

#include <cmath>
#include <vector>

namespace dmlab {

RVec potentialDiagonal(
    const LatticeSpace& space,
    const std::function<double(std::span<const double>)>& potential) {
  std::int64_t d = space.dim();
  RVec diag(d);
  std::vector<int> digits(space.particles());
  std::vector<double> coords(space.particles());
  for (std::int64_t i = 0; i < d; ++i) {
    space.unflatten(i, digits);
    for (int p = 0; p < space.particles(); ++p)
      coords[p] = space.coordinate(digits[p]);
    diag[i] = potential(coords);
  }
  return diag;
}

Hamiltonian buildHamiltonian(
    const LatticeSpace& space,
    const std::function<double(std::span<const double>)>& potential) {
  space.requireDense("buildHamiltonian");
  std::int64_t d = space.dim();
  Mat h = Mat::Zero(d, d);

  for (int p = 0; p < space.particles(); ++p) {
    double t = kHbar * kHbar /
               (2.0 * space.mass(p) * space.spacing() * space.spacing());
    for (std::int64_t i = 0; i < d; ++i) {
      h(i, i) += 2.0 * t;
      h(space.neighbor(i, p, +1), i) -= t;
      h(space.neighbor(i, p, -1), i) -= t;
    }
  }

  RVec v = potentialDiagonal(space, potential);
  for (std::int64_t i = 0; i < d; ++i) h(i, i) += v[i];

  double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12)
    throw ValidationError("buildHamiltonian: hermiticity violated");
  return Hamiltonian{std::move(h)};
}

Hamiltonian buildHamiltonian(const LatticeSpace& space,
                             const std::function<double(double)>& potential) {
  return buildHamiltonian(space, [&](std::span<const double> q) {
    double v = 0.0;
    for (double x : q) v += potential(x);
    return v;
  });
}

Mat dftColumns(int m, double spacing) {
  Mat f(m, m);
  for (int n = 0; n < m; ++n) {
    double k = latticeMomentum(n, m, spacing);
    for (int j = 0; j < m; ++j) {
      double phase = k * spacing * j;
      f(j, n) = cxd(std::cos(phase), std::sin(phase)) / std::sqrt(double(m));
    }
  }
  return f;
}

double latticeMomentum(int mode, int m, double spacing) {
  int shifted = mode <= (m - 1) / 2 ? mode : mode - m;
  return 2.0 * M_PI * shifted / (m * spacing);
}

Mat spectralMomentum(int m, double spacing) {
  Mat f = dftColumns(m, spacing);
  Vec diag(m);
  for (int n = 0; n < m; ++n)
    diag[n] = kHbar * latticeMomentum(n, m, spacing);
  Mat p = f * diag.asDiagonal() * f.adjoint();
  return 0.5 * (p + Mat(p.adjoint()));  // scrub rounding asymmetry
}

Vec planeWaveVector(int mode, int m, double spacing) {
  double L = m * spacing;
  double k = latticeMomentum(mode, m, spacing);
  Vec psi(m);
  for (int j = 0; j < m; ++j) {
    double phase = k * spacing * j;
    psi[j] = cxd(std::cos(phase), std::sin(phase)) / std::sqrt(L);
  }
  return psi;
}

}  // namespace dmlab
