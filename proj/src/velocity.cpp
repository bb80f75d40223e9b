#include "dmlab/velocity.hpp"

#include <cmath>

namespace dmlab {

KineticMetric KineticMetric::standard(const LatticeSpace& space) {
  RMat g = RMat::Zero(space.particles(), space.particles());
  for (int i = 0; i < space.particles(); ++i) g(i, i) = 1.0 / space.mass(i);
  return KineticMetric{std::move(g)};
}

KineticMetric KineticMetric::fromMatrix(RMat g) {
  if (g.rows() != g.cols() ||
      (g - RMat(g.transpose())).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("KineticMetric: matrix must be symmetric");
  return KineticMetric{std::move(g)};
}

// Shared assembly: phase-gradient fields u_i = num_i / den and v = hbar*G*u.
// Cells below the node floor get zero velocity; the integrator consults the
// weight array before trusting any interpolated value there.
static VelocityField assemble(const LatticeSpace& space,
                              const KineticMetric& metric,
                              std::vector<RVec> num, RVec den, double time) {
  int n = space.particles();
  std::int64_t d = space.dim();
  VelocityField f;
  f.weight = std::move(den);
  f.nodeFloor = kNodeThreshold * f.weight.maxCoeff();
  f.time = time;
  f.v.assign(n, RVec::Zero(d));
  for (std::int64_t j = 0; j < d; ++j) {
    if (f.weight[j] < f.nodeFloor) continue;
    for (int i = 0; i < n; ++i) {
      double vi = 0.0;
      for (int l = 0; l < n; ++l)
        vi += metric.g(i, l) * num[l][j];
      f.v[i][j] = kHbar * vi / f.weight[j];
    }
  }
  return f;
}

VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const std::vector<WeightedVector>& branches,
                         double time) {
  int n = space.particles();
  std::int64_t d = space.dim();
  double inv2a = 1.0 / (2.0 * space.spacing());
  std::vector<RVec> num(n, RVec::Zero(d));
  RVec den = RVec::Zero(d);
  for (const auto& b : branches) {
    const Vec& psi = b.amplitudes;
    den += b.weight * psi.cwiseAbs2();
    for (int i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < d; ++j) {
        cxd grad = (psi[space.neighbor(j, i, +1)] -
                    psi[space.neighbor(j, i, -1)]) * inv2a;
        num[i][j] += b.weight * std::imag(grad * std::conj(psi[j]));
      }
    }
  }
  return assemble(space, metric, std::move(num), std::move(den), time);
}

VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const DensityMatrix& w, double time) {
  int n = space.particles();
  std::int64_t d = space.dim();
  if (w.dim() != d) throw ValidationError("buildField: dimension mismatch");
  double inv2a = 1.0 / (2.0 * space.spacing());
  const Mat& m = w.entries();
  std::vector<RVec> num(n, RVec::Zero(d));
  RVec den(d);
  for (std::int64_t j = 0; j < d; ++j) den[j] = m(j, j).real();
  for (int i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      num[i][j] = std::imag((m(space.neighbor(j, i, +1), j) -
                             m(space.neighbor(j, i, -1), j)) * inv2a);
  return assemble(space, metric, std::move(num), std::move(den), time);
}

VelocityField buildField(const LatticeSpace& space, const KineticMetric& metric,
                         const PureState& psi, double time) {
  return buildField(space, metric, {{1.0, psi.amplitudes()}}, time);
}

FieldSample sampleField(const VelocityField& field, const LatticeSpace& space,
                        const RVec& q) {
  int n = space.particles();
  int m = space.pointsPerAxis();
  double a = space.spacing();

  // Anchor cell and fractional offsets per axis.
  std::vector<int> base(n);
  std::vector<double> frac(n);
  for (int i = 0; i < n; ++i) {
    double x = space.wrap(q[i]) / a;
    double fl = std::floor(x);
    int j = static_cast<int>(fl) % m;
    base[i] = j;
    frac[i] = x - fl;
  }

  FieldSample out;
  out.v = RVec::Zero(n);
  // 2^N corners of the interpolation cell.
  for (int corner = 0; corner < (1 << n); ++corner) {
    double weight = 1.0;
    std::int64_t flat = 0;
    for (int i = 0; i < n; ++i) {
      bool hi = corner & (1 << i);
      int j = hi ? (base[i] + 1) % m : base[i];
      weight *= hi ? frac[i] : 1.0 - frac[i];
      flat += static_cast<std::int64_t>(j) * space.stride(i);
    }
    if (field.weight[flat] < field.nodeFloor) {
      out.node = true;
      return out;
    }
    for (int i = 0; i < n; ++i) out.v[i] += weight * field.v[i][flat];
  }
  return out;
}

static RVec evaluateOrThrow(const VelocityField& field,
                            const LatticeSpace& space, const RVec& q) {
  FieldSample s = sampleField(field, space, q);
  if (s.node)
    throw NodeError("velocity field evaluated at a node of the state");
  return s.v;
}

RVec velocityFieldPure(const PureState& psi, const LatticeSpace& space,
                       const RVec& q) {
  if (q.size() != space.particles())
    throw ValidationError("velocityFieldPure: configuration size mismatch");
  VelocityField f =
      buildField(space, KineticMetric::standard(space), psi, 0.0);
  return evaluateOrThrow(f, space, q);
}

RVec velocityFieldDensity(const DensityMatrix& w, const LatticeSpace& space,
                          const RVec& q) {
  if (q.size() != space.particles())
    throw ValidationError("velocityFieldDensity: configuration size mismatch");
  VelocityField f =
      buildField(space, KineticMetric::standard(space), w, 0.0);
  return evaluateOrThrow(f, space, q);
}

}  // namespace dmlab
