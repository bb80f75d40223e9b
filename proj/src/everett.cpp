#include "dmlab/everett.hpp"

#include <algorithm>
#include <string>

namespace dmlab {

double everettProbability(const DensityMatrix& w, const Mat& projector) {
  if (projector.rows() != w.dim() || projector.cols() != w.dim())
    throw ValidationError("everettProbability: projector dimension mismatch");
  double herm = (projector - projector.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10)
    throw ValidationError("everettProbability: projector not Hermitian");
  double idem = (projector * projector - projector).cwiseAbs().maxCoeff();
  if (idem > 1e-10)
    throw ValidationError("everettProbability: projector not idempotent (" +
                          std::to_string(idem) + ")");
  double p = w.cellVolume() * (w.entries() * projector).trace().real();
  if (p < -1e-10 || p > 1.0 + 1e-10)
    throw ValidationError("everettProbability: probability out of range");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace dmlab
