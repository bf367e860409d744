#include "rsid/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsid/baseline.hpp"
#include "rsid/errors.hpp"
#include "rsid/kernel.hpp"
#include "spd.hpp"

namespace rsid {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_energies(const Eigen::VectorXd& d) {
  if (d.size() < 1) throw ShapeError("differential energies must be nonempty");
  if (!(d.array() >= 0.0).all() || !d.allFinite()) {
    throw ParameterError("differential energies must be finite and >= 0");
  }
  if (!(d.maxCoeff() > 0.0)) {
    throw ParameterError(
        "differential energies are all zero; the scale objectives are "
        "degenerate");
  }
}

// Evaluates q_beta for many betas against one d: the log of each energy is
// taken once, each evaluation is then a single log-sum-exp pass.
class BetaObjective {
 public:
  explicit BetaObjective(const Eigen::VectorXd& d) : n_(d.size()) {
    check_energies(d);
    log_d_ = d.array().log();  // zeros map to -inf and drop out of the sum
  }

  double operator()(double beta) const {
    detail::check_beta(beta);
    const double log_beta = std::log(beta);
    const double nn = static_cast<double>(n_);

    // f(beta) = beta^(1-n) * S(beta) with
    // S = sum_{k<n-1} d_k beta^(n-1-k) + d_{n-1} (1-beta); all exponents in
    // S are nonnegative, so only the shared beta^(1-n) carries the range.
    double max_term = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n_; ++k) {
      max_term = std::max(max_term, term(k, log_beta, beta));
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n_; ++k) {
      sum += std::exp(term(k, log_beta, beta) - max_term);
    }
    const double log_f = (1.0 - nn) * log_beta + max_term + std::log(sum);
    return nn * log_f + 0.5 * nn * (nn - 1.0) * log_beta - std::log1p(-beta);
  }

  Eigen::Index size() const { return n_; }

 private:
  double term(Eigen::Index k, double log_beta, double beta) const {
    return k + 1 < n_
               ? log_d_[k] + static_cast<double>(n_ - 1 - k) * log_beta
               : log_d_[k] + std::log1p(-beta);
  }

  Eigen::Index n_;
  Eigen::ArrayXd log_d_;
};

double beta_grid_argmin(const BetaObjective& q, const BetaSearch& search) {
  if (search.grid_points < 2 || search.refine_rounds < 0 ||
      search.refine_factor < 2) {
    throw ParameterError("degenerate beta search schedule");
  }
  const int grid = search.grid_points;
  double step = (kBetaMax - kBetaMin) / static_cast<double>(grid - 1);

  double best_beta = kBetaMin;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double beta = std::min(kBetaMin + step * i, kBetaMax);
    const double value = q(beta);
    if (value < best) {  // strict: ties keep the smaller beta
      best = value;
      best_beta = beta;
    }
  }

  for (int round = 0; round < search.refine_rounds; ++round) {
    const double fine = step / static_cast<double>(search.refine_factor);
    const double center = best_beta;
    for (int j = -search.refine_factor; j <= search.refine_factor; ++j) {
      const double beta = std::clamp(center + fine * j, kBetaMin, kBetaMax);
      const double value = q(beta);
      if (value < best) {
        best = value;
        best_beta = beta;
      }
    }
    step = fine;
  }
  return best_beta;
}

double log_prior_sum(const Hyperparameters& theta, const NoiseModel& model) {
  double sum = 0.0;
  if (theta.upsilon.size() > 0) {
    for (Eigen::Index i = 0; i < theta.upsilon.size(); ++i) {
      sum += log_prior_tau(theta.upsilon[i], model);
    }
  } else {
    for (Eigen::Index t = 0; t < theta.tau.size(); ++t) {
      sum += log_prior_tau(theta.tau[t], model);
    }
  }
  return sum;
}

// Convergence is measured on the packed parameter vector: kernel scale,
// decay, then whichever noise scales are actually iterated.
Eigen::VectorXd pack_theta(const Hyperparameters& theta, bool grouped) {
  const Eigen::VectorXd& scales = grouped ? theta.upsilon : theta.tau;
  Eigen::VectorXd packed(2 + scales.size());
  packed[0] = theta.lambda;
  packed[1] = theta.beta;
  packed.tail(scales.size()) = scales;
  return packed;
}

void expand_upsilon(const Eigen::VectorXd& upsilon, const Grouping& grouping,
                    Eigen::VectorXd& tau) {
  for (int i = 0; i < grouping.p; ++i) {
    tau.segment(grouping.block_begin(i), grouping.m).setConstant(upsilon[i]);
  }
}

}  // namespace

double q_beta(double beta, const Eigen::VectorXd& d) {
  return BetaObjective(d)(beta);
}

double update_beta(const Eigen::VectorXd& d, const BetaSearch& search) {
  const BetaObjective q(d);
  // A single coefficient cannot identify a decay rate (the objective is
  // constant); pin the result instead of ranking rounding noise.
  if (q.size() == 1) return kBetaMin;
  return beta_grid_argmin(q, search);
}

double update_lambda(const Eigen::VectorXd& d, double beta) {
  detail::check_beta(beta);
  check_energies(d);
  const Eigen::VectorXd w = weight_vector(static_cast<int>(d.size()), beta);
  return d.dot(w) / static_cast<double>(d.size());
}

std::pair<double, Eigen::VectorXd> q_components(const Hyperparameters& theta,
                                                const PosteriorState& state,
                                                const NoiseModel& model) {
  const Eigen::Index n = state.d.size();
  if (state.eps.size() != theta.tau.size()) {
    throw ShapeError("state/theta sample count mismatch");
  }
  const Eigen::VectorXd w = weight_vector(static_cast<int>(n), theta.beta);
  const double q0 = state.d.dot(w) / theta.lambda +
                    detail::log_det_prior(static_cast<int>(n), theta.lambda,
                                          theta.beta);

  Eigen::VectorXd qt(theta.tau.size());
  for (Eigen::Index t = 0; t < qt.size(); ++t) {
    const double tau = theta.tau[t];
    const double eps = state.eps[t];
    if (!(tau > 0.0)) throw ParameterError("tau entries must be positive");
    switch (model.kind) {
      case NoiseKind::Gaussian:
        qt[t] = eps / tau + std::log(tau);
        break;
      case NoiseKind::Laplacian:
        qt[t] = eps / tau + std::log(tau) + 2.0 * tau / model.sigma2;
        break;
      case NoiseKind::StudentT:
        if (std::isinf(model.nu)) {
          qt[t] = eps / tau + std::log(tau);
        } else {
          qt[t] = (eps + (model.nu - 2.0) * model.sigma2) / tau +
                  (model.nu + 3.0) * std::log(tau);
        }
        break;
    }
  }
  return {q0, std::move(qt)};
}

Hyperparameters initialize_theta(const Dataset& data, double sigma2, int order,
                                 const std::optional<Grouping>& grouping) {
  const Estimate ml = fit_ss_ml(data, order, sigma2);
  Hyperparameters theta;
  theta.lambda = ml.theta.lambda;
  theta.beta = ml.theta.beta;
  theta.tau =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.size()), sigma2);
  if (grouping) {
    if (grouping->samples() != static_cast<int>(data.size())) {
      throw ShapeError("grouping does not cover the dataset");
    }
    theta.upsilon = Eigen::VectorXd::Constant(grouping->p, sigma2);
  }
  return theta;
}

Estimate run_em(const Dataset& data, int order, const NoiseModel& model,
                const EMOptions& options) {
  validate_dataset(data);
  detail::check_order(order);
  if (options.max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(options.rel_tol > 0.0)) throw ParameterError("rel_tol must be > 0");
  if (options.nu_update_period < 1) {
    throw ParameterError("nu_update_period must be >= 1");
  }
  const bool grouped = options.grouping.has_value();
  if (grouped && model.kind == NoiseKind::Gaussian) {
    throw ParameterError("the Gaussian kind has no grouped scale update");
  }

  const int n_samples = static_cast<int>(data.size());
  if (grouped && options.grouping->samples() != n_samples) {
    throw ShapeError("grouping does not cover the dataset");
  }
  const Eigen::MatrixXd U = toeplitz_regressor(data.u, order, n_samples);
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n_samples);

  Hyperparameters theta;
  if (options.init_theta) {
    theta = *options.init_theta;
    if (theta.tau.size() != n_samples) {
      throw ShapeError("init_theta.tau length must equal the sample count");
    }
    if (grouped && theta.upsilon.size() != options.grouping->p) {
      throw ShapeError("init_theta.upsilon length must equal the block count");
    }
  } else {
    theta = initialize_theta(data, model.sigma2, order, options.grouping);
  }

  NoiseModel current = model;  // carries the evolving nu selection
  const bool student = model.kind == NoiseKind::StudentT;

  EMTrace trace;
  trace.iterates.push_back({theta, student ? current.nu : kNaN, kNaN});

  Eigen::VectorXd prev = pack_theta(theta, grouped);
  PosteriorState state;
  int sweeps = 0;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    try {
      state = evaluate_posterior(U, y, theta);
    } catch (const ConditioningError& e) {
      throw ConditioningError(e.what(), e.lambda, e.beta, e.min_tau, iter);
    }
    if (options.track_objective) {
      // This posterior is evaluated at the most recent snapshot, so its
      // evidence prices that snapshot with no extra factorization.
      trace.iterates.back().objective =
          state.gauss_loglik + log_prior_sum(theta, current);
    }

    if (student && current.nu_auto &&
        (iter - 1) % options.nu_update_period == 0) {
      current.nu =
          select_nu(y - state.y_hat, current.sigma2, current.nu_grid);
    }

    // M-step: noise scales first, then decay, then kernel scale.
    if (grouped) {
      const Eigen::VectorXd zeta =
          group_residuals(y, state.y_hat, U, state.P, *options.grouping);
      theta.upsilon = upsilon_update(zeta, *options.grouping, current);
      expand_upsilon(theta.upsilon, *options.grouping, theta.tau);
    } else {
      theta.tau = tau_update(state.eps, current);
    }
    if (!options.freeze_lambda_beta) {
      theta.beta = update_beta(state.d, options.beta_search);
      theta.lambda = update_lambda(state.d, theta.beta);
    }

    sweeps = iter;
    trace.iterates.push_back({theta, student ? current.nu : kNaN, kNaN});

    const Eigen::VectorXd packed = pack_theta(theta, grouped);
    const double rel_change = (packed - prev).norm() / prev.norm();
    if (rel_change < options.rel_tol) {
      trace.converged = true;
      break;
    }
    prev = packed;
  }
  trace.iterations = sweeps;
  trace.stop_reason = trace.converged ? "tolerance" : "max_iter";

  try {
    state = evaluate_posterior(U, y, theta);
  } catch (const ConditioningError& e) {
    throw ConditioningError(e.what(), e.lambda, e.beta, e.min_tau, sweeps);
  }
  if (options.track_objective) {
    trace.iterates.back().objective =
        state.gauss_loglik + log_prior_sum(theta, current);
  }
  const CredibilityBounds bounds =
      credibility_bounds(state.g_hat, state.P, 0.99);

  Estimate est;
  est.g_hat = state.g_hat;
  est.lower99 = bounds.lower;
  est.upper99 = bounds.upper;
  est.theta = theta;
  if (student) est.nu = current.nu;
  est.trace = std::move(trace);
  return est;
}

}  // namespace rsid
