#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dmlab {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;   // complex amplitude vector on the configuration grid
using Mat = Eigen::MatrixXcd;   // dense complex operator / kernel
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Natural units: hbar = 1, default masses 1. Lengths are grid lengths.
inline constexpr double kHbar = 1.0;

inline constexpr const char* kVersion = "dmlab 1.0.0";

// Largest dimension for which a d x d kernel may be materialized.
inline constexpr std::int64_t kDenseDimLimit = 4096;

// Error taxonomy. Callers react differently to these: configuration errors
// map to CLI exit code 2, node errors are handled by the trajectory
// integrator via substepping, resource errors abort before allocation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

// Guidance-law evaluation at (or too close to) a zero of the quantum state.
class NodeError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmlab
