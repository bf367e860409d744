#pragma once

#include <Eigen/Dense>

#include "rsid/estimate.hpp"
#include "rsid/signals.hpp"

namespace rsid {

/// Default FIR order used when estimating the noise floor: long enough to
/// absorb the system dynamics, short enough to leave residual degrees of
/// freedom.
int default_fir_order(int n_samples, int kernel_order);

/// Noise-variance estimate from an unregularized FIR least-squares fit:
/// squared residual norm over (N - fir_order). Throws DataError when the
/// regressor is rank deficient or the order leaves no residual degrees of
/// freedom.
double estimate_noise_variance(const Dataset& data, int fir_order);

/// Negative log marginal likelihood of the Gaussian model, up to the additive
/// constant N log(2 pi): log det Sigma_y + y' Sigma_y^-1 y with
/// Sigma_y = sigma2 I + lambda U K U'. Smaller is better.
double marginal_likelihood_objective(double lambda, double beta, double sigma2,
                                     const Eigen::MatrixXd& U,
                                     const Eigen::VectorXd& y);

struct SsMlOptions {
  int grid_points = 50;       ///< coarse grid resolution per axis
  int refine_rounds = 3;      ///< coordinate refinement sweeps after the grid
  int refine_points = 41;     ///< points per refinement line search
};

/// Empirical-Bayes baseline: pick (lambda, beta) by minimizing the marginal
/// likelihood objective over a coarse grid followed by coordinate
/// refinement, then return the Gaussian posterior estimate at the optimum
/// with tau pinned to sigma2.
Estimate fit_ss_ml(const Dataset& data, int order, double sigma2,
                   const SsMlOptions& options = {});

}  // namespace rsid
