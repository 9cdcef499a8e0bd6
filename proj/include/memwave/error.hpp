#pragma once

#include <stdexcept>
#include <string>

namespace memwave {

/// Argument outside the mathematical domain of an operation (t = 0 on a singular kernel, n <= 0, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Invalid user-supplied parameters or configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation is well defined in general but not for this input class.
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A condition was requested for kernels of the wrong decay class.
struct BranchMismatchError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Non-finite values that are not attributable to blow-up.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace memwave
