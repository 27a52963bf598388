#pragma once

#include <stdexcept>
#include <string>

namespace splatbudget {

/// Bad input shape or value (odd pooling dims, NaN threshold, size mismatch).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well formed but outside the domain an operation can answer.
/// The CLI maps every subclass to exit code 3.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BudgetBelowMinimum : public DomainError {
 public:
  using DomainError::DomainError;
};

class BudgetExceedsMaximum : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateBaseline : public DomainError {
 public:
  using DomainError::DomainError;
};

/// File could not be opened, read or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace splatbudget
