#pragma once

#include <stdexcept>
#include <string>

namespace rsid {

/// A scalar argument is outside its mathematical domain (nonpositive scale,
/// decay outside the kernel window, invalid partition size, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operand dimensions are inconsistent (length mismatch, wrong row count).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input data cannot be used for identification (all-zero input, non-finite
/// samples, malformed files).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A symmetric positive-definite factorization failed after exhausting the
/// jitter escalation schedule. Carries the hyperparameters in force so the
/// caller can report where the solve broke; iteration is -1 outside EM.
struct ConditioningError : std::runtime_error {
  double lambda;
  double beta;
  double min_tau;
  int iteration;

  ConditioningError(const std::string& msg, double lambda_, double beta_,
                    double min_tau_, int iteration_ = -1)
      : std::runtime_error(msg),
        lambda(lambda_),
        beta(beta_),
        min_tau(min_tau_),
        iteration(iteration_) {}
};

}  // namespace rsid
