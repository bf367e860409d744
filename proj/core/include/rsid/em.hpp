#pragma once

#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "rsid/estimate.hpp"
#include "rsid/noise.hpp"
#include "rsid/signals.hpp"

namespace rsid {

/// Schedule for the one-dimensional decay-rate search: a uniform coarse grid
/// over the beta domain followed by local refinements, each shrinking the
/// step by refine_factor while scanning one old step to either side.
struct BetaSearch {
  int grid_points = 2000;
  int refine_rounds = 2;
  int refine_factor = 10;
};

struct EMOptions {
  int max_iter = 200;
  double rel_tol = 1e-3;  ///< relative theta-change stopping threshold
  BetaSearch beta_search;
  std::optional<Grouping> grouping;  ///< blockwise noise variances when set
  bool track_objective = false;      ///< record the MAP objective per iterate
  int nu_update_period = 1;  ///< re-select nu every this many iterations

  /// Warm start: skip the marginal-likelihood initialization and begin from
  /// this theta instead. tau must have one entry per sample; with grouping,
  /// upsilon must have one entry per block.
  std::optional<Hyperparameters> init_theta;

  /// Keep (lambda, beta) pinned at their initial values; only the noise
  /// scales are updated. With a Gaussian model this makes run_em reproduce
  /// the grid-search baseline posterior exactly.
  bool freeze_lambda_beta = false;
};

/// Profiled objective for the kernel decay rate at fixed differential
/// energies d (lambda concentrated out):
///   Q(beta) = n log f(beta) + (n(n-1)/2) log beta - log(1-beta),
///   f(beta) = sum_{i=1}^{n-1} d_i beta^(1-i) + d_n (1-beta) beta^(1-n),
/// accumulated in the log domain so the beta^(1-i) range cannot overflow.
/// Equal, up to terms independent of beta, to the exact blockwise objective
/// n log(sum_i d_i w_i) + sum_i log w_diag_i evaluated at the minimizing
/// lambda. Smaller is better.
double q_beta(double beta, const Eigen::VectorXd& d);

/// Grid argmin of q_beta over the beta domain with local refinement; ties
/// break toward the smaller beta. With a single coefficient the objective is
/// constant in beta, and the smallest admissible decay is returned.
double update_beta(const Eigen::VectorXd& d, const BetaSearch& search = {});

/// Closed-form kernel scale update: lambda = (1/n) sum_i d_i w_i with
/// w = weight_vector(n, beta).
double update_lambda(const Eigen::VectorXd& d, double beta);

/// The blockwise objective split used by the scale updates, evaluated at
/// theta given the posterior state of the reference iterate. Returns
///   Q0(lambda, beta) = ghat'(lambda K)^-1 ghat + log det(lambda K)
///                      + tr((lambda K)^-1 P)   [via the factorization]
/// and the per-sample noise criteria, up to additive terms independent of
/// tau: Laplacian eps/tau + log tau + 2 tau/sigma2; Student
/// (eps+(nu-2) sigma2)/tau + (nu+3) log tau; Gaussian eps/tau + log tau.
std::pair<double, Eigen::VectorXd> q_components(const Hyperparameters& theta,
                                                const PosteriorState& state,
                                                const NoiseModel& model);

/// Starting point of the iteration: (lambda, beta) from the Gaussian
/// marginal-likelihood grid search on the same data, every noise scale at
/// sigma2 (its prior mean), and with grouping every block scale at sigma2.
Hyperparameters initialize_theta(
    const Dataset& data, double sigma2, int order,
    const std::optional<Grouping>& grouping = std::nullopt);

/// Iterative MAP estimation of the impulse response under the scale-mixture
/// noise model: alternate the posterior E-step with closed-form noise-scale
/// updates and the (beta, lambda) kernel updates until the relative theta
/// change drops below rel_tol or max_iter is reached. Non-convergence is
/// reported through the trace, not as an error; conditioning failures carry
/// the iteration index. The Gaussian kind keeps tau pinned at sigma2 and
/// only re-fits the kernel.
Estimate run_em(const Dataset& data, int order, const NoiseModel& model,
                const EMOptions& options = {});

}  // namespace rsid
