#include "rsid/kernel.hpp"

#include <cmath>

#include "rsid/errors.hpp"

namespace rsid {

namespace detail {

void check_beta(double beta) {
  if (!(beta >= kBetaMin && beta <= kBetaMax)) {
    throw ParameterError("kernel decay beta outside [1e-4, 0.9999]");
  }
}

void check_order(int n) {
  if (n < 1) throw ParameterError("kernel order must be >= 1");
}

double stable_pow(double beta, double k) {
  return std::exp(k * std::log(beta));
}

}  // namespace detail

Eigen::MatrixXd build_kernel(int n, double beta) {
  detail::check_order(n);
  detail::check_beta(beta);
  const double log_beta = std::log(beta);
  Eigen::VectorXd pow(n);
  for (int i = 0; i < n; ++i) pow[i] = std::exp((i + 1) * log_beta);
  Eigen::MatrixXd K(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) K(i, j) = pow[std::max(i, j)];
  }
  return K;
}

KernelFactors kernel_factors(int n, double beta) {
  detail::check_order(n);
  detail::check_beta(beta);
  const double log_beta = std::log(beta);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n - 1; ++i) {
    w[i] = (1.0 - beta) * std::exp((i + 1) * log_beta);
  }
  w[n - 1] = std::exp(n * log_beta);
  return {std::move(w)};
}

Eigen::MatrixXd delta_matrix(int n) {
  detail::check_order(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) d(i, i + 1) = -1.0;
  return d;
}

Eigen::VectorXd weight_vector(int n, double beta) {
  detail::check_order(n);
  detail::check_beta(beta);
  const double log_beta = std::log(beta);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n - 1; ++i) {
    w[i] = std::exp(-(i + 1) * log_beta) / (1.0 - beta);
  }
  w[n - 1] = std::exp(-n * log_beta);
  return w;
}

namespace {

// y = Delta * x: y_i = x_i - x_{i+1}, last entry passes through.
Eigen::VectorXd apply_delta(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) y[i] = x[i] - x[i + 1];
  y[n - 1] = x[n - 1];
  return y;
}

// y = Delta^T * x: y_i = x_i - x_{i-1}, first entry passes through.
Eigen::VectorXd apply_delta_transpose(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd y(n);
  y[0] = x[0];
  for (Eigen::Index i = 1; i < n; ++i) y[i] = x[i] - x[i - 1];
  return y;
}

}  // namespace

Eigen::VectorXd apply_kernel_inverse(const Eigen::VectorXd& x, double lambda,
                                     double beta) {
  if (lambda <= 0.0) throw ParameterError("lambda must be positive");
  const int n = static_cast<int>(x.size());
  detail::check_order(n);
  const Eigen::VectorXd w_inv = weight_vector(n, beta);
  Eigen::VectorXd t = apply_delta(x);
  t.array() *= w_inv.array();
  return apply_delta_transpose(t) / lambda;
}

Eigen::MatrixXd apply_kernel_inverse(const Eigen::MatrixXd& x, double lambda,
                                     double beta) {
  if (lambda <= 0.0) throw ParameterError("lambda must be positive");
  const int n = static_cast<int>(x.rows());
  detail::check_order(n);
  Eigen::MatrixXd out(n, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = apply_kernel_inverse(Eigen::VectorXd(x.col(c)), lambda, beta);
  }
  return out;
}

void add_kernel_inverse(Eigen::MatrixXd& target, double lambda, double beta) {
  if (lambda <= 0.0) throw ParameterError("lambda must be positive");
  const int n = static_cast<int>(target.rows());
  detail::check_order(n);
  if (target.cols() != n) throw ShapeError("kernel-inverse target not square");
  // Delta^T diag(v) Delta is tridiagonal: entry (i,i) = v_{i-1} + v_i,
  // entry (i, i+1) = -v_i, with v = weight_vector / lambda.
  Eigen::VectorXd v = weight_vector(n, beta) / lambda;
  target(0, 0) += v[0];
  for (int i = 1; i < n; ++i) {
    target(i, i) += v[i - 1] + v[i];
    target(i - 1, i) -= v[i - 1];
    target(i, i - 1) -= v[i - 1];
  }
}

}  // namespace rsid
