#pragma once

#include <stdexcept>
#include <string>

namespace pcmlab {

/// Input violates a documented precondition or hypothesis (bad dimensions,
/// singular system matrix, parameter outside its open interval, ...).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation broke down numerically (non-PD iterate, singular
/// denominator block, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pcmlab
