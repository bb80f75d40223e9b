#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dmlab/common.hpp"

namespace dmlab {

// Discretized N-particle configuration space: each particle lives on the same
// periodic 1-D grid of M points with spacing a, so configurations are points
// of an M^N lattice on the N-torus of circumference L = M*a. Grid coordinates
// are q_j = j*a. The joint index is row-major with particle 0 slowest.
class LatticeSpace {
 public:
  LatticeSpace(int particleCount, int pointsPerParticle, double spacing,
               std::vector<double> masses = {});

  int particles() const { return n_; }
  int pointsPerAxis() const { return m_; }
  double spacing() const { return a_; }
  double length() const { return a_ * m_; }
  std::int64_t dim() const { return dim_; }
  double cellVolume() const { return cell_; }  // a^N, the grid measure
  double mass(int particle) const { return masses_[particle]; }
  const std::vector<double>& masses() const { return masses_; }

  std::int64_t stride(int particle) const { return strides_[particle]; }

  std::int64_t flatten(std::span<const int> digits) const;
  void unflatten(std::int64_t flat, std::span<int> digits) const;

  // Grid index of `particle` inside a flat joint index.
  int axisIndex(std::int64_t flat, int particle) const {
    return static_cast<int>((flat / strides_[particle]) % m_);
  }

  // Flat index of the configuration shifted by `delta` grid steps along one
  // particle axis, with periodic wrap-around.
  std::int64_t neighbor(std::int64_t flat, int particle, int delta) const;

  double coordinate(int gridIndex) const { return a_ * gridIndex; }

  // Nearest grid index to a continuous coordinate (periodic).
  int snapIndex(double x) const;

  // Wrap a coordinate into [0, L).
  double wrap(double x) const;

  // Signed displacement wrapped into [-L/2, L/2).
  double minImage(double dx) const;

  // Resource guard for operations that materialize a dim x dim kernel.
  void requireDense(const char* what) const;

 private:
  int n_;
  int m_;
  double a_;
  std::vector<double> masses_;
  std::int64_t dim_;
  double cell_;
  std::vector<std::int64_t> strides_;
};

}  // namespace dmlab
