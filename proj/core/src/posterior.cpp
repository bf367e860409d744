#include "rsid/posterior.hpp"

#include <cmath>
#include <numbers>

#include "rsid/errors.hpp"
#include "rsid/kernel.hpp"
#include "rsid/stats.hpp"
#include "spd.hpp"

namespace rsid {
namespace {

void check_theta(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                 const Hyperparameters& theta) {
  if (U.rows() != y.size()) throw ShapeError("regressor/output row mismatch");
  if (theta.tau.size() != y.size()) {
    throw ShapeError("tau length must equal the sample count");
  }
  if (!(theta.lambda > 0.0) || !std::isfinite(theta.lambda)) {
    throw ParameterError("lambda must be positive and finite");
  }
  detail::check_beta(theta.beta);
  if (!(theta.tau.array() > 0.0).all()) {
    throw ParameterError("every tau entry must be positive");
  }
}

struct Solve {
  Eigen::VectorXd g_hat;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double gauss_loglik;
};

Solve solve_information(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                        const Hyperparameters& theta) {
  check_theta(U, y, theta);
  const int n = static_cast<int>(U.cols());
  const Eigen::VectorXd inv_tau = theta.tau.cwiseInverse();

  Eigen::MatrixXd A = U.transpose() * inv_tau.asDiagonal() * U;
  add_kernel_inverse(A, theta.lambda, theta.beta);

  Solve s{Eigen::VectorXd(),
          detail::chol_with_jitter(A, theta.lambda, theta.beta,
                                   theta.tau.minCoeff()),
          0.0};
  const Eigen::VectorXd b = U.transpose() * (inv_tau.asDiagonal() * y);
  s.g_hat = s.llt.solve(b);

  // Evidence through the determinant lemma:
  // log det Sigma_y = sum log tau + log det(lambda K) + log det A, and
  // y' Sigma_y^-1 y = y' Sv^-1 y - b' A^-1 b.
  const double log_det_sy = theta.tau.array().log().sum() +
                            detail::log_det_prior(n, theta.lambda, theta.beta) +
                            detail::log_det_chol(s.llt);
  const double quad = y.dot(inv_tau.asDiagonal() * y) - b.dot(s.g_hat);
  const double N = static_cast<double>(y.size());
  s.gauss_loglik =
      -0.5 * (N * std::log(2.0 * std::numbers::pi) + log_det_sy + quad);
  return s;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> compute_posterior(
    const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
    const Hyperparameters& theta) {
  Solve s = solve_information(U, y, theta);
  Eigen::MatrixXd P =
      s.llt.solve(Eigen::MatrixXd::Identity(U.cols(), U.cols()));
  return {std::move(s.g_hat), std::move(P)};
}

void predictor_stats(const Eigen::MatrixXd& U, const Eigen::VectorXd& g_hat,
                     const Eigen::MatrixXd& P, Eigen::VectorXd& y_hat,
                     Eigen::VectorXd& s_diag) {
  if (U.cols() != g_hat.size() || P.rows() != g_hat.size() ||
      P.cols() != g_hat.size()) {
    throw ShapeError("predictor stats shape mismatch");
  }
  y_hat = U * g_hat;
  // Diagonal of U P U^T without forming it: rowwise quadratic forms. Tiny
  // negative values are factorization roundoff; clamp to keep variances sane.
  s_diag = ((U * P).array() * U.array()).rowwise().sum().cwiseMax(0.0);
}

Eigen::VectorXd residual_energies(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& y_hat,
                                  const Eigen::VectorXd& s_diag) {
  if (y.size() != y_hat.size() || y.size() != s_diag.size()) {
    throw ShapeError("residual energy length mismatch");
  }
  return (y - y_hat).array().square().matrix() + s_diag;
}

void differential_energies(const Eigen::VectorXd& g_hat,
                           const Eigen::MatrixXd& P, Eigen::VectorXd& dg_hat,
                           Eigen::VectorXd& h_diag, Eigen::VectorXd& d) {
  const Eigen::Index n = g_hat.size();
  if (P.rows() != n || P.cols() != n) {
    throw ShapeError("covariance/mean size mismatch");
  }
  dg_hat.resize(n);
  h_diag.resize(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    dg_hat[i] = g_hat[i] - g_hat[i + 1];
    h_diag[i] =
        std::max(P(i, i) - 2.0 * P(i, i + 1) + P(i + 1, i + 1), 0.0);
  }
  dg_hat[n - 1] = g_hat[n - 1];
  h_diag[n - 1] = std::max(P(n - 1, n - 1), 0.0);
  d = dg_hat.array().square().matrix() + h_diag;
}

PosteriorState evaluate_posterior(const Eigen::MatrixXd& U,
                                  const Eigen::VectorXd& y,
                                  const Hyperparameters& theta) {
  Solve s = solve_information(U, y, theta);
  PosteriorState state;
  state.g_hat = std::move(s.g_hat);
  state.P = s.llt.solve(Eigen::MatrixXd::Identity(U.cols(), U.cols()));
  state.gauss_loglik = s.gauss_loglik;
  predictor_stats(U, state.g_hat, state.P, state.y_hat, state.s_diag);
  state.eps = residual_energies(y, state.y_hat, state.s_diag);
  differential_energies(state.g_hat, state.P, state.dg_hat, state.h_diag,
                        state.d);
  return state;
}

double map_objective(const Hyperparameters& theta, const Eigen::MatrixXd& U,
                     const Eigen::VectorXd& y, const NoiseModel& model) {
  const Solve s = solve_information(U, y, theta);
  double log_prior = 0.0;
  if (theta.upsilon.size() > 0) {
    for (Eigen::Index i = 0; i < theta.upsilon.size(); ++i) {
      log_prior += log_prior_tau(theta.upsilon[i], model);
    }
  } else {
    for (Eigen::Index t = 0; t < theta.tau.size(); ++t) {
      log_prior += log_prior_tau(theta.tau[t], model);
    }
  }
  return s.gauss_loglik + log_prior;
}

CredibilityBounds credibility_bounds(const Eigen::VectorXd& g_hat,
                                     const Eigen::MatrixXd& P, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("credibility level must lie in (0, 1)");
  }
  if (P.rows() != g_hat.size() || P.cols() != g_hat.size()) {
    throw ShapeError("covariance/mean size mismatch");
  }
  const double z = stats::normal_quantile(0.5 * (1.0 + level));
  const Eigen::VectorXd sd = P.diagonal().cwiseMax(0.0).cwiseSqrt();
  return {g_hat - z * sd, g_hat + z * sd};
}

}  // namespace rsid
