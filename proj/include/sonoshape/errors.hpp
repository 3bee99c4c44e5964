#pragma once

#include <stdexcept>
#include <string>

namespace sonoshape {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshError : Error {
  using Error::Error;
};

// Raised when a deformation leaves the diffeomorphism regime
// (non-positive Jacobian determinant at some evaluation point).
struct DeformationError : Error {
  using Error::Error;
};

// Loss of the uniform non-degeneracy bound on the mass coefficient.
struct DegeneracyError : Error {
  int step = -1;
  DegeneracyError(const std::string& msg, int step_) : Error(msg), step(step_) {}
};

struct NonConvergenceError : Error {
  using Error::Error;
};

struct BlowUpError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace sonoshape
