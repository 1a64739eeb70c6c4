#pragma once

#include <stdexcept>
#include <string>

namespace frequalize {

// Exit-code mapping used by the CLI: InputError/HypothesisError -> 2,
// NumericalError -> 3.

/// Malformed input: bad configuration, wrong shapes, violated preconditions.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An analytic hypothesis of a checked inequality does not hold.
class HypothesisError : public InputError {
public:
  using InputError::InputError;
};

/// Non-finite values, instability, eigensolver or positivity failure.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace frequalize
