#pragma once

#include <stdexcept>
#include <string>

namespace keyrate {

// Input outside an operation's domain (bad probability, invalid subsystem,
// non-Hermitian matrix, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical procedure failed: no convergence, empty filter output, missing
// sign change in a bisection bracket.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace keyrate
