#pragma once

#include <functional>

#include "dmlab/lattice.hpp"
#include "dmlab/states.hpp"

namespace dmlab {

struct Hamiltonian {
  Mat matrix;  // plain Hermitian operator on the amplitude vector
};

// Kinetic term: per-particle 3-point periodic Laplacian scaled by
// -hbar^2/(2 m_i), i.e. (hbar^2/(2 m_i a^2)) * (2 delta_jj' - delta_j,j'+-1).
// Potential: diagonal V evaluated at every grid configuration.
// Eigenvalues of the free single-particle matrix are the discrete dispersion
// (hbar^2/(m a^2)) (1 - cos(2 pi k / M)).
Hamiltonian buildHamiltonian(
    const LatticeSpace& space,
    const std::function<double(std::span<const double>)>& potential);

// Convenience overload: single-particle potential of one coordinate, summed
// over particles.
Hamiltonian buildHamiltonian(const LatticeSpace& space,
                             const std::function<double(double)>& potential);

// Diagonal of the potential part only.
RVec potentialDiagonal(
    const LatticeSpace& space,
    const std::function<double(std::span<const double>)>& potential);

// --- spectral helpers on one M-point axis -------------------------------

// Unitary DFT matrix F with F(j,n) = exp(i k_n x_j) / sqrt(M); column n is
// the normalized plane wave of lattice momentum k_n.
Mat dftColumns(int m, double spacing);

// Signed lattice momentum of DFT mode n: 2 pi n' / L with n' in [-M/2, M/2).
double latticeMomentum(int mode, int m, double spacing);

// Exact spectral momentum operator P = F diag(hbar k) F^dagger (Hermitian).
Mat spectralMomentum(int m, double spacing);

// Normalized plane-wave PureState exp(i k x)/sqrt(L) on a single-particle
// lattice; `mode` indexes the lattice momentum as above.
Vec planeWaveVector(int mode, int m, double spacing);

}  // namespace dmlab
