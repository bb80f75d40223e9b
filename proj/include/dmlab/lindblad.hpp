#pragma once

#include <vector>

#include "dmlab/states.hpp"

namespace dmlab {

// GKLS generator data: dW/dt = -(i/hbar)[H, W]
//                              + sum_a gamma_a (L_a W L_a^+ - 1/2 {L_a^+ L_a, W}).
struct LindbladSpec {
  std::vector<Mat> jumpOperators;
  std::vector<double> rates;  // nonnegative, one per jump operator

  void validate(std::int64_t dim) const;
  bool trivial() const;  // all rates zero or no operators
};

// Fixed-step RK4 integrator for the GKLS equation with trace renormalization
// after every step. Step size must satisfy the stability guard
//   dt * (|H| + sum_a gamma_a |L_a|^2) <= 0.1
// where |.| is the infinity norm (an upper bound on the spectral norm).
class LindbladStepper {
 public:
  LindbladStepper(Mat h, LindbladSpec spec, double dt, double cellVolume);

  void step(Mat& w) const;         // advance by dt in place
  Mat rhs(const Mat& w) const;     // GKLS right-hand side
  double dt() const { return dt_; }

 private:
  Mat h_;
  LindbladSpec spec_;
  double dt_;
  double cell_;
};

// Integrates `steps` RK4 steps of size dt. Output eigenvalues in [-1e-8, 0)
// are clipped to zero and the state renormalized; more negative spectrum is
// an integration failure. With all rates zero this agrees with the unitary
// (von Neumann) evolution up to RK4 error.
DensityMatrix propagateLindblad(const DensityMatrix& w, const Mat& h,
                                const LindbladSpec& spec, double dt,
                                long steps);

}  // namespace dmlab
