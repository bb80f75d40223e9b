#pragma once

#include "dmlab/hamiltonian.hpp"
#include "dmlab/states.hpp"

namespace dmlab {

// Exact unitary evolution through a cached eigendecomposition of H:
// U(t) = E exp(-i eps t / hbar) E^dagger. No time-stepping error; U(dt)^steps
// and U(steps * dt) coincide by construction.
class Propagator {
 public:
  Propagator(const Hamiltonian& h, double dt);

  // For Hamiltonians whose spectral form is known analytically (columns of
  // `eigenvectors` plain-orthonormal). Unitarity of U(dt) is still verified.
  Propagator(Mat eigenvectors, RVec eigenvalues, double dt);

  double dt() const { return dt_; }
  std::int64_t dim() const { return vectors_.rows(); }
  const RVec& eigenvalues() const { return values_; }
  const Mat& eigenvectors() const { return vectors_; }

  Vec toEigenbasis(const Vec& v) const { return vectors_.adjoint() * v; }
  Vec fromEigenbasis(const Vec& c) const { return vectors_ * c; }

  // Phase factors exp(-i eps_k t / hbar).
  Vec phases(double t) const;

  Vec evolveVector(const Vec& psi, double t) const;
  Mat unitary(double t) const;

 private:
  void checkUnitarity() const;
  Mat vectors_;
  RVec values_;
  double dt_;
};

// psi_t = U(dt)^steps psi.
PureState propagatePure(const PureState& psi, const Propagator& prop,
                        long steps);

// W_t = U W U^dagger; trace, hermiticity and spectrum are preserved.
DensityMatrix propagateDensity(const DensityMatrix& w, const Propagator& prop,
                               long steps);

// Caches the eigenbasis coefficients of one state so that snapshots at many
// times cost a single basis transform each.
class EvolvingPure {
 public:
  EvolvingPure(const Propagator& prop, Vec psi0)
      : prop_(&prop), coeffs_(prop.toEigenbasis(psi0)) {}
  Vec at(double t) const {
    return prop_->fromEigenbasis(prop_->phases(t).cwiseProduct(coeffs_));
  }

 private:
  const Propagator* prop_;
  Vec coeffs_;
};

}  // namespace dmlab
