#include "dmlab/lindblad.hpp"

#include <cmath>
#include <string>

namespace dmlab {

void LindbladSpec::validate(std::int64_t dim) const {
  if (jumpOperators.size() != rates.size())
    throw ValidationError("LindbladSpec: one rate per jump operator required");
  for (double g : rates)
    if (g < 0.0) throw ValidationError("LindbladSpec: negative rate");
  for (const auto& l : jumpOperators)
    if (l.rows() != dim || l.cols() != dim)
      throw ValidationError("LindbladSpec: jump operator dimension mismatch");
}

bool LindbladSpec::trivial() const {
  for (double g : rates)
    if (g > 0.0) return false;
  return true;
}

static double infinityNorm(const Mat& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

LindbladStepper::LindbladStepper(Mat h, LindbladSpec spec, double dt,
                                 double cellVolume)
    : h_(std::move(h)), spec_(std::move(spec)), dt_(dt), cell_(cellVolume) {
  spec_.validate(h_.rows());
  double scale = infinityNorm(h_);
  for (std::size_t a = 0; a < spec_.rates.size(); ++a)
    scale += spec_.rates[a] * infinityNorm(spec_.jumpOperators[a]) *
             infinityNorm(spec_.jumpOperators[a]);
  if (dt_ * scale > 0.1)
    throw StepSizeError("LindbladStepper: dt * (|H| + sum gamma |L|^2) = " +
                        std::to_string(dt_ * scale) + " exceeds 0.1");
}

Mat LindbladStepper::rhs(const Mat& w) const {
  Mat dw = cxd(0.0, -1.0 / kHbar) * (h_ * w - w * h_);
  for (std::size_t a = 0; a < spec_.rates.size(); ++a) {
    double g = spec_.rates[a];
    if (g == 0.0) continue;
    const Mat& l = spec_.jumpOperators[a];
    Mat ldl = l.adjoint() * l;
    dw.noalias() += g * (l * w * l.adjoint());
    dw.noalias() -= (0.5 * g) * (ldl * w);
    dw.noalias() -= (0.5 * g) * (w * ldl);
  }
  return dw;
}

void LindbladStepper::step(Mat& w) const {
  Mat k1 = rhs(w);
  Mat k2 = rhs(w + (0.5 * dt_) * k1);
  Mat k3 = rhs(w + (0.5 * dt_) * k2);
  Mat k4 = rhs(w + dt_ * k3);
  w += (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  w = 0.5 * (w + Mat(w.adjoint()));
  w /= cell_ * w.trace().real();
}

DensityMatrix propagateLindblad(const DensityMatrix& w, const Mat& h,
                                const LindbladSpec& spec, double dt,
                                long steps) {
  LindbladStepper stepper(h, spec, dt, w.cellVolume());
  Mat wt = w.entries();
  for (long s = 0; s < steps; ++s) stepper.step(wt);

  // Clip the tiny negative spectrum RK4 can leave behind; anything beyond
  // rounding scale means the step size was too coarse after all.
  Eigen::SelfAdjointEigenSolver<Mat> es(wt);
  RVec eig = w.cellVolume() * es.eigenvalues();
  double minEig = eig.minCoeff();
  if (minEig < -1e-8)
    throw StepSizeError("propagateLindblad: spectrum went negative (" +
                        std::to_string(minEig) + "); reduce dt");
  if (minEig < 0.0) {
    RVec clipped = eig.cwiseMax(0.0);
    clipped /= clipped.sum();
    Mat rebuilt = Mat::Zero(wt.rows(), wt.cols());
    for (Eigen::Index k = 0; k < clipped.size(); ++k) {
      if (clipped[k] == 0.0) continue;
      rebuilt.noalias() += (clipped[k] / w.cellVolume()) *
                           (es.eigenvectors().col(k) *
                            es.eigenvectors().col(k).adjoint());
    }
    wt = std::move(rebuilt);
  }
  return DensityMatrix::trusted(std::move(wt), w.cellVolume());
}

}  // namespace dmlab
