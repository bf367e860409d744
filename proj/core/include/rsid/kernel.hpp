#pragma once

#include <Eigen/Dense>

namespace rsid {

// Decay domain: below beta_min the kernel is numerically zero, above beta_max
// it is numerically singular; every search and update clamps to this window.
inline constexpr double kBetaMin = 1e-4;
inline constexpr double kBetaMax = 0.9999;

/// First-order stable-spline kernel: K[i][j] = beta^max(i+1, j+1) with
/// 0-based storage indices (the exponent counts samples from 1). Symmetric
/// positive definite for beta in (0, 1).
Eigen::MatrixXd build_kernel(int n, double beta);

/// Diagonal of W in the factorization K = inv(Delta) * W * inv(Delta)^T,
/// where Delta is upper bidiagonal with 1 on the diagonal and -1 on the
/// superdiagonal: w_diag[i] = (1-beta)*beta^(i+1) for i < n-1, and
/// w_diag[n-1] = beta^n.
struct KernelFactors {
  Eigen::VectorXd w_diag;
};
KernelFactors kernel_factors(int n, double beta);

/// The Delta factor as a dense matrix; intended for oracles and small-n work.
Eigen::MatrixXd delta_matrix(int n);

/// Elementwise reciprocal of kernel_factors().w_diag. Entry i weights the
/// i-th differential energy in the scale update.
Eigen::VectorXd weight_vector(int n, double beta);

/// Applies (lambda*K)^{-1} to a vector or matrix through the factorization
/// Delta^T * diag(1/w) * Delta / lambda; the kernel is never densely
/// inverted (its condition number grows like beta^{-n}).
Eigen::VectorXd apply_kernel_inverse(const Eigen::VectorXd& x, double lambda,
                                     double beta);
Eigen::MatrixXd apply_kernel_inverse(const Eigen::MatrixXd& x, double lambda,
                                     double beta);

/// Adds (lambda*K)^{-1} onto a (pre-sized n x n) matrix in place; used to
/// assemble posterior information matrices without temporaries.
void add_kernel_inverse(Eigen::MatrixXd& target, double lambda, double beta);

namespace detail {
void check_beta(double beta);
void check_order(int n);
/// beta^k as exp(k*log(beta)); underflows to exactly 0 instead of losing
/// order, matching the factorization path.
double stable_pow(double beta, double k);
}  // namespace detail

}  // namespace rsid
