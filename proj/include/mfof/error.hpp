#pragma once

#include <stdexcept>
#include <string>

namespace mfof {

// Bad input values or arguments outside an operation's domain.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Invalid configuration: parse errors, unknown keys, violated setup conditions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver or line search failed to make progress.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdmissibilityError : DomainError {
  using DomainError::DomainError;
};

}  // namespace mfof
