#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "rsid/errors.hpp"

namespace rsid::detail {

/// Cholesky with the escalation schedule: jitter starts at 1e-10 of the mean
/// diagonal scale and grows tenfold up to 1e-4 of it before giving up with a
/// ConditioningError carrying the hyperparameters in force.
inline Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& A,
                                                    double lambda, double beta,
                                                    double min_tau,
                                                    int iteration = -1) {
  // Eigen can report Success on a factor full of inf/NaN, so finiteness is
  // part of the acceptance check.
  const auto usable = [](const Eigen::LLT<Eigen::MatrixXd>& f) {
    return f.info() == Eigen::Success && f.matrixLLT().allFinite();
  };
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (usable(llt)) return llt;
  const double scale = A.trace() / static_cast<double>(A.rows());
  for (double factor = 1e-10; factor <= 1e-4; factor *= 10.0) {
    Eigen::MatrixXd jittered = A;
    jittered.diagonal().array() += factor * scale;
    llt.compute(jittered);
    if (usable(llt)) return llt;
  }
  throw ConditioningError(
      "positive-definite factorization failed after jitter escalation", lambda,
      beta, min_tau, iteration);
}

inline double log_det_chol(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// log det(lambda K) through the kernel factorization: n log(lambda) +
/// sum_i log w_i, with the sum in closed form so extreme decays cannot
/// underflow it.
inline double log_det_prior(int n, double lambda, double beta) {
  const double nn = static_cast<double>(n);
  return nn * std::log(lambda) + (nn - 1.0) * std::log1p(-beta) +
         (nn * (nn + 1.0) / 2.0) * std::log(beta);
}

}  // namespace rsid::detail
