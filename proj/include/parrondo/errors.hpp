#pragma once

#include <stdexcept>
#include <string>

namespace parrondo {

// Bad arguments: dimension mismatch, out-of-range indices, malformed flags.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The chain does not have the structure an operation needs (several closed
// classes, periodicity, a partition that is not lumpable, ...).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver gave up before reaching its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace parrondo
