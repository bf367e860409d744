#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsid/posterior.hpp"

namespace rsid {

/// One recorded optimizer iterate. `nu` is NaN unless the noise model carries
/// a degrees-of-freedom parameter; `objective` is NaN when tracking is off.
struct EMIterate {
  Hyperparameters theta;
  double nu = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct EMTrace {
  /// Starting point first, then one entry per update sweep. The objective
  /// fields stay NaN unless tracking is requested.
  std::vector<EMIterate> iterates;
  int iterations = 0;  ///< update sweeps actually performed
  bool converged = false;
  std::string stop_reason;  ///< "tolerance", "max_iter", or "grid"
};

/// Final product of an identification run: posterior mean of the impulse
/// response with 99% pointwise credibility bounds and the fitted
/// hyperparameters.
struct Estimate {
  Eigen::VectorXd g_hat;
  Eigen::VectorXd lower99;
  Eigen::VectorXd upper99;
  Hyperparameters theta;
  std::optional<double> nu;  ///< set when the noise model has one
  EMTrace trace;
};

}  // namespace rsid
