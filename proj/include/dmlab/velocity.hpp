#pragma once

#include <vector>

#include "dmlab/lattice.hpp"
#include "dmlab/states.hpp"

namespace dmlab {

// Guidance velocities are assembled from the per-axis phase-gradient fields
//   u_i(q) = Im[ D_i psi (q) / psi(q) ]            (pure state)
//   u_i(q) = Im[ D_i^(1st) W (q,q) / W(q,q) ]      (kernel; gradient in the
//                                                   first argument, then
//                                                   evaluated on the diagonal)
// with D_i the central difference along particle axis i (O(a^2) accurate),
// multilinearly interpolated to continuous configurations.
//
// The velocity is v = hbar * G * u with G the kinetic metric of the
// Hamiltonian's quadratic kinetic form H_kin = (1/2) sum_ij G_ij p_i p_j.
// For the standard kinetic term G = diag(1/m_i), which reproduces the
// familiar guidance law; a cross term like g p_x p_y contributes off-diagonal
// metric entries, keeping the flow equivariant for such Hamiltonians.
struct KineticMetric {
  RMat g;  // N x N symmetric

  static KineticMetric standard(const LatticeSpace& space);
  static KineticMetric fromMatrix(RMat g);
};

// Velocity snapshot on the full grid at one time: per-axis velocities plus
// the probability weight used for node detection.
struct VelocityField {
  std::vector<RVec> v;  // N arrays of length dim, metric already applied
  RVec weight;          // plain |psi|^2-type weights (diagonal of the kernel)
  double nodeFloor;     // cells with weight < nodeFloor are nodes
  double time = 0.0;
};

inline constexpr double kNodeThreshold = 1e-12;  // relative to max weight

// Field from weighted pure branches (exactly the kernel field of the mixture
// sum_b w_b |psi_b><psi_b| by linearity of numerator and denominator).
VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const std::vector<WeightedVector>& branches,
                         double time);

// Field read directly off a dense kernel.
VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const DensityMatrix& w, double time);

VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const PureState& psi, double time);

struct FieldSample {
  RVec v;            // length N
  bool node = false;  // interpolation cell touches a node
};

// Multilinear interpolation at a continuous configuration (periodic).
FieldSample sampleField(const VelocityField& field, const LatticeSpace& space,
                        const RVec& q);

// v_i = (hbar/m_i) Im[grad_i psi / psi] at Q. Throws NodeError at nodes.
RVec velocityFieldPure(const PureState& psi, const LatticeSpace& space,
                       const RVec& q);

// v_i = (hbar/m_i) Im[grad_i^(1st) W(q,q')|_{q=q'=Q} / W(Q,Q)].
RVec velocityFieldDensity(const DensityMatrix& w, const LatticeSpace& space,
                          const RVec& q);

}  // namespace dmlab
