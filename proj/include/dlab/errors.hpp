#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

// Bad input or violated precondition.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Spectral parameter sits (numerically) on the spectrum of an operator involved.
struct SpectralPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative method did not converge or an internal dimension check failed.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A checked mathematical invariant does not hold.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dlab
