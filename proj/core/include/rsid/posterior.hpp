#pragma once

#include <utility>

#include <Eigen/Dense>

#include "rsid/noise.hpp"

namespace rsid {

/// The hyperparameter vector: kernel scale lambda, kernel decay beta, and the
/// per-sample noise variances tau (length N). When the grouped variant is in
/// force, upsilon holds the p block variances and tau is its expansion to
/// sample resolution; upsilon stays empty otherwise.
struct Hyperparameters {
  double lambda = 1.0;
  double beta = 0.5;
  Eigen::VectorXd tau;
  Eigen::VectorXd upsilon;
};

/// Everything the E-step consumes, computed from one posterior solve:
/// posterior mean/covariance of g, predictor statistics (only the diagonal
/// of U P U^T is formed), the total residual energies eps_t =
/// (y_t - yhat_t)^2 + s_tt, the differential energies d_i = (Delta ghat)_i^2
/// + (Delta P Delta^T)_ii, and the Gaussian evidence log N(y; 0, Sigma_y).
struct PosteriorState {
  Eigen::VectorXd g_hat;
  Eigen::MatrixXd P;
  Eigen::VectorXd y_hat;
  Eigen::VectorXd s_diag;
  Eigen::VectorXd dg_hat;
  Eigen::VectorXd h_diag;
  Eigen::VectorXd eps;
  Eigen::VectorXd d;
  double gauss_loglik = 0.0;
};

/// Posterior of g given y: P = (U^T Sv^-1 U + (lambda K)^-1)^-1 and
/// g_hat = P U^T Sv^-1 y, with the kernel inverse applied through its
/// bidiagonal factorization and the information matrix solved by a
/// positive-definite factorization under the jitter escalation policy.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> compute_posterior(
    const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
    const Hyperparameters& theta);

/// Full E-step evaluation (posterior, predictor stats, energies, evidence).
PosteriorState evaluate_posterior(const Eigen::MatrixXd& U,
                                  const Eigen::VectorXd& y,
                                  const Hyperparameters& theta);

/// y_hat = U g_hat and s_diag[t] = row_t(U) P row_t(U)^T.
void predictor_stats(const Eigen::MatrixXd& U, const Eigen::VectorXd& g_hat,
                     const Eigen::MatrixXd& P, Eigen::VectorXd& y_hat,
                     Eigen::VectorXd& s_diag);

/// eps_t = (y_t - y_hat_t)^2 + s_diag_t.
Eigen::VectorXd residual_energies(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& y_hat,
                                  const Eigen::VectorXd& s_diag);

/// dg_hat = Delta g_hat, h_diag = diag(Delta P Delta^T),
/// d = dg_hat^2 + h_diag.
void differential_energies(const Eigen::VectorXd& g_hat,
                           const Eigen::MatrixXd& P, Eigen::VectorXd& dg_hat,
                           Eigen::VectorXd& h_diag, Eigen::VectorXd& d);

/// The objective EM ascends: log N(y; 0, Sigma_y) + sum_t log p(tau_t) with
/// Sigma_y = lambda U K U^T + diag(tau). Flat hyperpriors on (lambda, beta)
/// contribute zero inside their domains. For grouped hyperparameters the
/// prior sum runs over the block variances instead.
double map_objective(const Hyperparameters& theta, const Eigen::MatrixXd& U,
                     const Eigen::VectorXd& y, const NoiseModel& model);

struct CredibilityBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Elementwise two-sided Gaussian credibility interval
/// g_hat_i +/- z(level) * sqrt(P_ii).
CredibilityBounds credibility_bounds(const Eigen::VectorXd& g_hat,
                                     const Eigen::MatrixXd& P,
                                     double level = 0.99);

}  // namespace rsid
