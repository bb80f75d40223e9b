#include "dmlab/propagator.hpp"

#include <cmath>
#include <string>

namespace dmlab {

Propagator::Propagator(const Hamiltonian& h, double dt) : dt_(dt) {
  if (h.matrix.rows() != h.matrix.cols())
    throw ValidationError("Propagator: H not square");
  double herm = (h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12)
    throw ValidationError("Propagator: H hermiticity violated by " +
                          std::to_string(herm));
  Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
  vectors_ = es.eigenvectors();
  values_ = es.eigenvalues();
  checkUnitarity();
}

Propagator::Propagator(Mat eigenvectors, RVec eigenvalues, double dt)
    : vectors_(std::move(eigenvectors)), values_(std::move(eigenvalues)),
      dt_(dt) {
  if (vectors_.rows() != vectors_.cols() ||
      vectors_.cols() != values_.size())
    throw ValidationError("Propagator: spectral form shape mismatch");
  checkUnitarity();
}

void Propagator::checkUnitarity() const {
  Mat u = unitary(dt_);
  double dev = (u.adjoint() * u - Mat::Identity(u.rows(), u.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (dev > 1e-10)
    throw ValidationError("Propagator: U(dt) unitarity violated by " +
                          std::to_string(dev));
}

Vec Propagator::phases(double t) const {
  Vec ph(values_.size());
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    double angle = -values_[k] * t / kHbar;
    ph[k] = cxd(std::cos(angle), std::sin(angle));
  }
  return ph;
}

Vec Propagator::evolveVector(const Vec& psi, double t) const {
  return fromEigenbasis(phases(t).cwiseProduct(toEigenbasis(psi)));
}

Mat Propagator::unitary(double t) const {
  return vectors_ * phases(t).asDiagonal() * vectors_.adjoint();
}

PureState propagatePure(const PureState& psi, const Propagator& prop,
                        long steps) {
  double t = prop.dt() * static_cast<double>(steps);
  Vec amp = prop.evolveVector(psi.amplitudes(), t);
  return PureState::normalized(std::move(amp), psi.cellVolume());
}

DensityMatrix propagateDensity(const DensityMatrix& w, const Propagator& prop,
                               long steps) {
  double t = prop.dt() * static_cast<double>(steps);
  Mat u = prop.unitary(t);
  Mat wt = u * w.entries() * u.adjoint();
  wt = 0.5 * (wt + Mat(wt.adjoint()));
  return DensityMatrix::trusted(std::move(wt), w.cellVolume());
}

}  // namespace dmlab
