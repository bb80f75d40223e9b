#pragma once

#include "dmlab/states.hpp"

namespace dmlab {

// Born probability tr(W P) for a projection-valued outcome P (plain
// projector: Hermitian and idempotent within 1e-10). Clamped to [0, 1].
double everettProbability(const DensityMatrix& w, const Mat& projector);

}  // namespace dmlab
