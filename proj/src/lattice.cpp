#include "dmlab/lattice.hpp"

#include <cmath>
#include <string>

namespace dmlab {

LatticeSpace::LatticeSpace(int particleCount, int pointsPerParticle,
                           double spacing, std::vector<double> masses)
    : n_(particleCount), m_(pointsPerParticle), a_(spacing),
      masses_(std::move(masses)) {
  if (n_ < 1) throw ValidationError("LatticeSpace: particleCount must be >= 1");
  if (m_ < 2)
    throw ValidationError("LatticeSpace: pointsPerParticle must be >= 2");
  if (!(a_ > 0.0)) throw ValidationError("LatticeSpace: spacing must be > 0");
  if (masses_.empty()) masses_.assign(n_, 1.0);
  if (static_cast<int>(masses_.size()) != n_)
    throw ValidationError("LatticeSpace: need one mass per particle");
  for (double m : masses_)
    if (!(m > 0.0)) throw ValidationError("LatticeSpace: masses must be > 0");

  dim_ = 1;
  for (int i = 0; i < n_; ++i) {
    if (dim_ > (1LL << 40) / m_)
      throw ResourceError("LatticeSpace: M^N overflows the index range");
    dim_ *= m_;
  }
  cell_ = std::pow(a_, n_);
  strides_.resize(n_);
  std::int64_t s = 1;
  for (int i = n_ - 1; i >= 0; --i) {
    strides_[i] = s;
    s *= m_;
  }
}

std::int64_t LatticeSpace::flatten(std::span<const int> digits) const {
  std::int64_t flat = 0;
  for (int i = 0; i < n_; ++i) flat += strides_[i] * digits[i];
  return flat;
}

void LatticeSpace::unflatten(std::int64_t flat, std::span<int> digits) const {
  for (int i = 0; i < n_; ++i)
    digits[i] = static_cast<int>((flat / strides_[i]) % m_);
}

std::int64_t LatticeSpace::neighbor(std::int64_t flat, int particle,
                                    int delta) const {
  int j = axisIndex(flat, particle);
  int jn = ((j + delta) % m_ + m_) % m_;
  return flat + static_cast<std::int64_t>(jn - j) * strides_[particle];
}

int LatticeSpace::snapIndex(double x) const {
  double j = std::round(wrap(x) / a_);
  int ji = static_cast<int>(j);
  return ji % m_;  // round(L - eps) can land on M
}

double LatticeSpace::wrap(double x) const {
  double L = length();
  double w = std::fmod(x, L);
  if (w < 0.0) w += L;
  return w;
}

double LatticeSpace::minImage(double dx) const {
  double L = length();
  double w = std::fmod(dx + 0.5 * L, L);
  if (w < 0.0) w += L;
  return w - 0.5 * L;
}

void LatticeSpace::requireDense(const char* what) const {
  if (dim_ > kDenseDimLimit)
    throw ResourceError(std::string(what) + ": dimension " +
                        std::to_string(dim_) + " exceeds dense limit " +
                        std::to_string(kDenseDimLimit));
}

}  // namespace dmlab
