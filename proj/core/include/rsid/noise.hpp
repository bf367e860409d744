#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace rsid {

/// Grid marker for the Gaussian limit of Student's t.
inline constexpr double kNuInfinite = std::numeric_limits<double>::infinity();

/// Floor applied to every updated noise variance; an exactly fitted residual
/// would otherwise drive tau to 0 and destroy the conditioning of the
/// noise-precision weighting.
inline double tau_floor(double sigma2) { return 1e-8 * sigma2; }

enum class NoiseKind { Gaussian, Laplacian, StudentT };

/// Noise description shared by samplers, scale updates and the MAP objective.
/// sigma2 is the nominal noise variance (pre-estimated, not updated by EM).
/// For StudentT, either nu is a fixed value > 2 (or the infinite marker), or
/// nu_auto is set and nu_grid lists the candidates re-selected each EM
/// iteration; nu then holds the current selection.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma2 = 1.0;
  double nu = kNuInfinite;
  bool nu_auto = false;
  std::vector<double> nu_grid;

  static NoiseModel gaussian(double sigma2);
  static NoiseModel laplacian(double sigma2);
  static NoiseModel student(double sigma2, double nu);
  static NoiseModel student_auto(double sigma2);
  static NoiseModel student_auto(double sigma2, std::vector<double> grid);
};

/// The candidate degrees of freedom used by the auto-selected Student model:
/// {2.01, 2.25, 2.5, 2.75, 3, 5, 7.5, 10, 15, 50, infinite}.
const std::vector<double>& default_nu_grid();

/// Contiguous partition of N samples into p blocks of m = N/p each.
struct Grouping {
  int p = 0;
  int m = 0;

  Grouping() = default;
  /// Throws unless p divides N.
  Grouping(int N, int p);

  int samples() const { return p * m; }
  int block_begin(int i) const { return i * m; }
};

/// Scale update minimizing the per-sample Laplacian criterion
/// eps/tau + log(tau) + 2*tau/sigma2: tau = (sigma2/4)(sqrt(1+8*eps/sigma2)-1),
/// floored at tau_floor.
double tau_update_laplacian(double eps, double sigma2);

/// Scale update minimizing the per-sample Student criterion
/// (eps+(nu-2)*sigma2)/tau + (nu+3)*log(tau): tau = (eps+(nu-2)*sigma2)/(nu+3).
/// The infinite marker returns sigma2 exactly. Note the nu = 2 edge: this
/// formula yields eps/5 there (the tau prior at nu = 2 is proportional to
/// tau^-2, not flat, so the update does not degenerate to the raw residual
/// energy).
double tau_update_student(double eps, double sigma2, double nu);

/// Vectorized per-sample update dispatching on model.kind; Gaussian returns
/// sigma2 for every sample.
Eigen::VectorXd tau_update(const Eigen::VectorXd& eps, const NoiseModel& model);

/// Blockwise residual energies zeta_i = ||Y_i - Yhat_i||^2 + tr(S_ii), where
/// S_ii is the i-th diagonal block of U P U^T, accumulated row by row (the
/// full matrix is never formed).
Eigen::VectorXd group_residuals(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& y_hat,
                                const Eigen::MatrixXd& U,
                                const Eigen::MatrixXd& P,
                                const Grouping& grouping);

/// Grouped scale update: Laplacian Upsilon = (m*sigma2/4) *
/// (sqrt(1+8*zeta/(m^2*sigma2))-1); Student Upsilon =
/// (zeta+(nu-2)*sigma2)/(nu+2+m). Floored at tau_floor. m = 1 reproduces the
/// per-sample updates exactly.
double upsilon_update(double zeta, double sigma2, int m,
                      const NoiseModel& model);
Eigen::VectorXd upsilon_update(const Eigen::VectorXd& zeta,
                               const Grouping& grouping,
                               const NoiseModel& model);

/// Profile likelihood selection of the Student degrees of freedom over a
/// grid, from current prediction residuals; the infinite marker is scored as
/// a pure Gaussian. Ties break toward the smaller candidate.
double select_nu(const Eigen::VectorXd& residuals, double sigma2,
                 const std::vector<double>& grid);

/// Log density of the variance mixing prior at tau: exponential with mean
/// sigma2 (Laplacian), inverse gamma with shape nu/2 and scale
/// (nu-2)*sigma2/2 (StudentT), 0 for Gaussian (tau is not random). The
/// Student infinite marker also scores 0.
double log_prior_tau(double tau, const NoiseModel& model);

/// Samples noise through the scale-mixture construction (draw tau from the
/// mixing prior, then N(0, tau)); Gaussian samples N(0, sigma2) directly.
/// Student requires nu > 2 so the variance exists.
Eigen::VectorXd sample_noise(const NoiseModel& model, int len,
                             std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace rsid
