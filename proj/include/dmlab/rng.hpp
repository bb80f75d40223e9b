#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dmlab/common.hpp"

namespace dmlab {

// SplitMix64 step. Used only for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of substream `stream` from a master seed. Streams are
// used one-per-trajectory / one-per-history / one-per-sample so results do
// not depend on thread count or scheduling.
inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

inline std::mt19937_64 makeStream(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(deriveSeed(master, stream));
}

// Uniform double in [0, 1) with 53 random bits. All samplers below are
// hand-rolled on top of the (fully specified) mt19937_64 sequence, so a given
// seed reproduces bit-identical draws everywhere.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniformRange(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline std::int64_t uniformIndex(std::mt19937_64& g, std::int64_t n) {
  // Modulo bias is < 2^-40 for any n used here (n << 2^63); acceptable.
  return static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(n));
}

inline double exponentialSample(std::mt19937_64& g, double rate) {
  // Inverse CDF; log1p keeps accuracy for small uniforms.
  return -std::log1p(-uniform01(g)) / rate;
}

inline double normalSample(std::mt19937_64& g) {
  // Box-Muller, cosine branch only (one value per two uniforms).
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * M_PI * u2);
}

// Standard complex normal: E|z|^2 = 1.
inline cxd complexNormalSample(std::mt19937_64& g) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  double r = std::sqrt(-std::log1p(-u1));
  return cxd(r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2));
}

// Draw an index from a discrete probability vector (inverse CDF walk).
inline std::int64_t discreteSample(std::mt19937_64& g, const RVec& probs) {
  double u = uniform01(g);
  double acc = 0.0;
  for (std::int64_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;  // u landed in the rounding tail
}

}  // namespace dmlab
