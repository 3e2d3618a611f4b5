#pragma once

#include <stdexcept>

namespace cfmimo {

// Invalid or inconsistent user-supplied configuration. The CLI maps this to
// exit code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing experiment artifacts. The CLI
// maps this to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Orthogonal pilots requested with fewer pilot symbols than users.
struct OrthogonalImpossible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroVector : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization of a denominator matrix failed: the input
// statistics are corrupted (non-finite or not positive definite).
struct SingularDenominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace cfmimo
