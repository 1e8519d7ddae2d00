#pragma once

#include <stdexcept>
#include <string>

namespace msp {

/// Input outside the mathematical domain of an operation (nonpositive
/// constants, points outside an interval, singular inner products, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Block or matrix dimensions that do not conform.
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// A matrix that must be symmetric positive definite failed to factor.
class DefinitenessError : public std::runtime_error {
 public:
  explicit DefinitenessError(const std::string& what) : std::runtime_error(what) {}
};

/// Violated solver precondition (e.g. a non-symmetric operator handed to MINRES).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Invalid user configuration (CLI / run configuration).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace msp
