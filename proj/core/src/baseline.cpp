#include "rsid/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsid/errors.hpp"
#include "rsid/kernel.hpp"
#include "spd.hpp"

namespace rsid {
namespace {

struct MlWorkspace {
  Eigen::MatrixXd UtU;
  Eigen::VectorXd Uty;
  double yty = 0.0;
  int n_samples = 0;
  int order = 0;
};

MlWorkspace make_workspace(const Eigen::MatrixXd& U, const Eigen::VectorXd& y) {
  MlWorkspace w;
  w.UtU = U.transpose() * U;
  w.Uty = U.transpose() * y;
  w.yty = y.squaredNorm();
  w.n_samples = static_cast<int>(U.rows());
  w.order = static_cast<int>(U.cols());
  return w;
}

// Same quantity as marginal_likelihood_objective, with the data-side products
// precomputed so grid search pays only one factorization per point.
double ml_objective(double lambda, double beta, double sigma2,
                    const MlWorkspace& w) {
  Eigen::MatrixXd A = w.UtU / sigma2;
  add_kernel_inverse(A, lambda, beta);
  const auto llt = detail::chol_with_jitter(A, lambda, beta, sigma2);
  const Eigen::VectorXd b = w.Uty / sigma2;
  const double log_det = static_cast<double>(w.n_samples) * std::log(sigma2) +
                         detail::log_det_prior(w.order, lambda, beta) +
                         detail::log_det_chol(llt);
  const double quad = w.yty / sigma2 - b.dot(llt.solve(b));
  return log_det + quad;
}

// Trace of the unit-scale kernel: sum_{i=1..n} beta^i. Sets the natural
// magnitude of lambda for a given decay rate.
double kernel_trace(int n, double beta) {
  return beta * (1.0 - std::pow(beta, n)) / (1.0 - beta);
}

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ParameterError("sigma2 must be positive and finite");
  }
}

}  // namespace

int default_fir_order(int n_samples, int kernel_order) {
  if (n_samples < 2) throw DataError("need at least two samples");
  if (kernel_order < 1) throw ParameterError("order must be at least 1");
  return std::min(2 * kernel_order, n_samples / 2);
}

double estimate_noise_variance(const Dataset& data, int fir_order) {
  validate_dataset(data);
  const int n_samples = static_cast<int>(data.size());
  if (fir_order < 1 || fir_order >= n_samples) {
    throw ParameterError(
        "fir_order must lie in [1, sample count) to leave residual degrees "
        "of freedom");
  }
  const Eigen::MatrixXd U = toeplitz_regressor(data.u, fir_order, n_samples);
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n_samples);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(U);
  if (qr.rank() < fir_order) {
    throw DataError(
        "input signal is not exciting enough for the requested FIR order");
  }
  const Eigen::VectorXd residual = y - U * qr.solve(y);
  return residual.squaredNorm() / static_cast<double>(n_samples - fir_order);
}

double marginal_likelihood_objective(double lambda, double beta, double sigma2,
                                     const Eigen::MatrixXd& U,
                                     const Eigen::VectorXd& y) {
  if (U.rows() != y.size()) throw ShapeError("regressor/output row mismatch");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be positive and finite");
  }
  detail::check_beta(beta);
  check_sigma2(sigma2);
  return ml_objective(lambda, beta, sigma2, make_workspace(U, y));
}

Estimate fit_ss_ml(const Dataset& data, int order, double sigma2,
                   const SsMlOptions& options) {
  validate_dataset(data);
  check_sigma2(sigma2);
  if (order < 1) throw ParameterError("order must be at least 1");
  if (options.grid_points < 2) {
    throw ParameterError("grid_points must be at least 2");
  }
  if (options.refine_rounds < 0 || options.refine_points < 3) {
    throw ParameterError("refinement schedule is degenerate");
  }

  const int n_samples = static_cast<int>(data.size());
  const Eigen::MatrixXd U = toeplitz_regressor(data.u, order, n_samples);
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n_samples);
  const MlWorkspace w = make_workspace(U, y);

  const double mean_y = y.mean();
  const double var_y =
      (y.array() - mean_y).square().sum() / static_cast<double>(n_samples);
  const double energy_scale = var_y > 0.0 ? var_y : 1.0;

  // Coarse grid: beta uniform over its domain, lambda log-spaced over twelve
  // decades centered on the magnitude that puts the prior output variance at
  // the observed one for that beta.
  const int grid = options.grid_points;
  const double beta_step = (kBetaMax - kBetaMin) / static_cast<double>(grid - 1);
  const double decade_step = 12.0 / static_cast<double>(grid - 1);

  double best = std::numeric_limits<double>::infinity();
  double best_lambda = 1.0;
  double best_beta = 0.5;
  for (int i = 0; i < grid; ++i) {
    const double beta = std::min(kBetaMin + beta_step * i, kBetaMax);
    const double scale =
        energy_scale * static_cast<double>(order) / kernel_trace(order, beta);
    for (int j = 0; j < grid; ++j) {
      const double lambda = scale * std::pow(10.0, -6.0 + decade_step * j);
      const double value = ml_objective(lambda, beta, sigma2, w);
      if (value < best) {
        best = value;
        best_lambda = lambda;
        best_beta = beta;
      }
    }
  }

  // Coordinate refinement: line searches around the incumbent spanning twice
  // the current grid spacing, shrinking the spacing tenfold per round. The
  // incumbent is only replaced on strict improvement, so the result can never
  // fall behind any coarse grid point.
  double log_lambda_step = decade_step;
  double local_beta_step = beta_step;
  const int pts = options.refine_points;
  const double half = 0.5 * static_cast<double>(pts - 1);
  for (int round = 0; round < options.refine_rounds; ++round) {
    log_lambda_step /= 10.0;
    local_beta_step /= 10.0;

    const double center_log_lambda = std::log10(best_lambda);
    for (int j = 0; j < pts; ++j) {
      const double offset = (static_cast<double>(j) - half) * log_lambda_step;
      const double lambda = std::pow(10.0, center_log_lambda + offset);
      const double value = ml_objective(lambda, best_beta, sigma2, w);
      if (value < best) {
        best = value;
        best_lambda = lambda;
      }
    }

    const double center_beta = best_beta;
    for (int j = 0; j < pts; ++j) {
      const double offset = (static_cast<double>(j) - half) * local_beta_step;
      const double beta =
          std::clamp(center_beta + offset, kBetaMin, kBetaMax);
      const double value = ml_objective(best_lambda, beta, sigma2, w);
      if (value < best) {
        best = value;
        best_beta = beta;
      }
    }
  }

  Hyperparameters theta;
  theta.lambda = best_lambda;
  theta.beta = best_beta;
  theta.tau = Eigen::VectorXd::Constant(n_samples, sigma2);

  const PosteriorState state = evaluate_posterior(U, y, theta);
  const CredibilityBounds bounds =
      credibility_bounds(state.g_hat, state.P, 0.99);

  Estimate est;
  est.g_hat = state.g_hat;
  est.lower99 = bounds.lower;
  est.upper99 = bounds.upper;
  est.theta = theta;
  est.trace.iterates.push_back(
      {theta, std::numeric_limits<double>::quiet_NaN(), state.gauss_loglik});
  est.trace.iterations = 1;
  est.trace.converged = true;
  est.trace.stop_reason = "grid";
  return est;
}

}  // namespace rsid
