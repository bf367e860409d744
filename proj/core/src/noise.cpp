#include "rsid/noise.hpp"

#include <cmath>
#include <numbers>

#include "rsid/errors.hpp"
#include "rsid/rng.hpp"

namespace rsid {
namespace {

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ParameterError("noise variance must be positive and finite");
  }
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ParameterError("nu grid is empty");
  for (double nu : grid) {
    if (!(nu > 2.0)) {  // the infinite marker satisfies this
      throw ParameterError("every nu grid entry must exceed 2");
    }
  }
}

}  // namespace

NoiseModel NoiseModel::gaussian(double sigma2) {
  check_sigma2(sigma2);
  NoiseModel m;
  m.kind = NoiseKind::Gaussian;
  m.sigma2 = sigma2;
  return m;
}

NoiseModel NoiseModel::laplacian(double sigma2) {
  check_sigma2(sigma2);
  NoiseModel m;
  m.kind = NoiseKind::Laplacian;
  m.sigma2 = sigma2;
  return m;
}

NoiseModel NoiseModel::student(double sigma2, double nu) {
  check_sigma2(sigma2);
  if (!(nu > 2.0)) {
    throw ParameterError("Student noise requires nu > 2 (variance exists)");
  }
  NoiseModel m;
  m.kind = NoiseKind::StudentT;
  m.sigma2 = sigma2;
  m.nu = nu;
  return m;
}

NoiseModel NoiseModel::student_auto(double sigma2) {
  return student_auto(sigma2, default_nu_grid());
}

NoiseModel NoiseModel::student_auto(double sigma2, std::vector<double> grid) {
  check_sigma2(sigma2);
  check_grid(grid);
  NoiseModel m;
  m.kind = NoiseKind::StudentT;
  m.sigma2 = sigma2;
  m.nu_auto = true;
  m.nu_grid = std::move(grid);
  m.nu = m.nu_grid.front();
  return m;
}

const std::vector<double>& default_nu_grid() {
  static const std::vector<double> grid = {2.01, 2.25, 2.5, 2.75, 3.0,  5.0,
                                           7.5,  10.0, 15.0, 50.0, kNuInfinite};
  return grid;
}

Grouping::Grouping(int N, int p_) {
  if (p_ < 1 || N < 1) throw ParameterError("grouping sizes must be >= 1");
  if (N % p_ != 0) {
    throw ParameterError("group count must divide the sample count");
  }
  p = p_;
  m = N / p_;
}

double tau_update_laplacian(double eps, double sigma2) {
  if (eps < 0.0) throw ParameterError("residual energy must be >= 0");
  check_sigma2(sigma2);
  const double tau = (sigma2 / 4.0) * (std::sqrt(1.0 + 8.0 * eps / sigma2) - 1.0);
  return std::max(tau, tau_floor(sigma2));
}

double tau_update_student(double eps, double sigma2, double nu) {
  if (eps < 0.0) throw ParameterError("residual energy must be >= 0");
  check_sigma2(sigma2);
  if (std::isinf(nu)) return sigma2;  // Gaussian limit: every variance equal
  if (!(nu >= 2.0)) throw ParameterError("Student update requires nu >= 2");
  const double tau = (eps + (nu - 2.0) * sigma2) / (nu + 3.0);
  return std::max(tau, tau_floor(sigma2));
}

Eigen::VectorXd tau_update(const Eigen::VectorXd& eps,
                           const NoiseModel& model) {
  Eigen::VectorXd tau(eps.size());
  switch (model.kind) {
    case NoiseKind::Gaussian:
      tau.setConstant(model.sigma2);
      break;
    case NoiseKind::Laplacian:
      for (Eigen::Index t = 0; t < eps.size(); ++t) {
        tau[t] = tau_update_laplacian(eps[t], model.sigma2);
      }
      break;
    case NoiseKind::StudentT:
      for (Eigen::Index t = 0; t < eps.size(); ++t) {
        tau[t] = tau_update_student(eps[t], model.sigma2, model.nu);
      }
      break;
  }
  return tau;
}

Eigen::VectorXd group_residuals(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& y_hat,
                                const Eigen::MatrixXd& U,
                                const Eigen::MatrixXd& P,
                                const Grouping& grouping) {
  const Eigen::Index N = y.size();
  if (y_hat.size() != N || U.rows() != N) {
    throw ShapeError("group residual length mismatch");
  }
  if (P.rows() != U.cols() || P.cols() != U.cols()) {
    throw ShapeError("posterior covariance shape mismatch");
  }
  if (grouping.samples() != N) {
    throw ParameterError("grouping does not cover the sample count");
  }
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(grouping.p);
  for (Eigen::Index t = 0; t < N; ++t) {
    const double resid = y[t] - y_hat[t];
    const double s_tt = U.row(t) * P * U.row(t).transpose();
    zeta[static_cast<int>(t) / grouping.m] += resid * resid + s_tt;
  }
  return zeta;
}

double upsilon_update(double zeta, double sigma2, int m,
                      const NoiseModel& model) {
  if (zeta < 0.0) throw ParameterError("group residual energy must be >= 0");
  if (m < 1) throw ParameterError("block size must be >= 1");
  check_sigma2(sigma2);
  switch (model.kind) {
    case NoiseKind::Gaussian:
      throw ParameterError("Gaussian noise has no grouped scale update");
    case NoiseKind::Laplacian: {
      if (m == 1) return tau_update_laplacian(zeta, sigma2);
      const double md = static_cast<double>(m);
      const double ups =
          (md * sigma2 / 4.0) *
          (std::sqrt(1.0 + 8.0 * zeta / (md * md * sigma2)) - 1.0);
      return std::max(ups, tau_floor(sigma2));
    }
    case NoiseKind::StudentT: {
      if (m == 1) return tau_update_student(zeta, sigma2, model.nu);
      if (std::isinf(model.nu)) return sigma2;
      const double ups = (zeta + (model.nu - 2.0) * sigma2) /
                         (model.nu + 2.0 + static_cast<double>(m));
      return std::max(ups, tau_floor(sigma2));
    }
  }
  throw ParameterError("unknown noise kind");
}

Eigen::VectorXd upsilon_update(const Eigen::VectorXd& zeta,
                               const Grouping& grouping,
                               const NoiseModel& model) {
  if (zeta.size() != grouping.p) throw ShapeError("zeta length != group count");
  Eigen::VectorXd ups(zeta.size());
  for (Eigen::Index i = 0; i < zeta.size(); ++i) {
    ups[i] = upsilon_update(zeta[i], model.sigma2, grouping.m, model);
  }
  return ups;
}

double select_nu(const Eigen::VectorXd& residuals, double sigma2,
                 const std::vector<double>& grid) {
  check_sigma2(sigma2);
  check_grid(grid);
  const double N = static_cast<double>(residuals.size());

  auto score = [&](double nu) {
    if (std::isinf(nu)) {
      // Gaussian log-likelihood N(0, sigma2).
      return -0.5 * N * std::log(2.0 * std::numbers::pi * sigma2) -
             residuals.squaredNorm() / (2.0 * sigma2);
    }
    const double scale = sigma2 * (nu - 2.0);
    double tail = 0.0;
    for (Eigen::Index t = 0; t < residuals.size(); ++t) {
      tail += std::log1p(residuals[t] * residuals[t] / scale);
    }
    return N * (std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                0.5 * std::log(std::numbers::pi * scale)) -
           ((nu + 1.0) / 2.0) * tail;
  };

  double best_nu = grid.front();
  double best_score = score(best_nu);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = score(grid[i]);
    if (s > best_score || (s == best_score && grid[i] < best_nu)) {
      best_score = s;
      best_nu = grid[i];
    }
  }
  return best_nu;
}

double log_prior_tau(double tau, const NoiseModel& model) {
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  switch (model.kind) {
    case NoiseKind::Gaussian:
      return 0.0;  // tau is not random
    case NoiseKind::Laplacian:
      return -std::log(model.sigma2) - tau / model.sigma2;
    case NoiseKind::StudentT: {
      if (std::isinf(model.nu)) return 0.0;  // degenerate at sigma2
      const double nu = model.nu;
      const double b = (nu - 2.0) * model.sigma2 / 2.0;
      return (nu / 2.0) * std::log(b) - std::lgamma(nu / 2.0) -
             (nu / 2.0 + 1.0) * std::log(tau) - b / tau;
    }
  }
  throw ParameterError("unknown noise kind");
}

Eigen::VectorXd sample_noise(const NoiseModel& model, int len,
                             std::uint64_t seed, std::uint64_t stream) {
  if (len < 1) throw ParameterError("noise length must be >= 1");
  if (model.nu_auto) {
    throw ParameterError("sampling requires a fixed noise model");
  }
  Rng rng(seed, stream);
  Eigen::VectorXd v(len);
  switch (model.kind) {
    case NoiseKind::Gaussian: {
      const double sd = std::sqrt(model.sigma2);
      for (int t = 0; t < len; ++t) v[t] = sd * rng.normal();
      break;
    }
    case NoiseKind::Laplacian:
      for (int t = 0; t < len; ++t) {
        const double tau = rng.exponential(model.sigma2);
        v[t] = std::sqrt(tau) * rng.normal();
      }
      break;
    case NoiseKind::StudentT: {
      if (std::isinf(model.nu)) {
        const double sd = std::sqrt(model.sigma2);
        for (int t = 0; t < len; ++t) v[t] = sd * rng.normal();
        break;
      }
      if (!(model.nu > 2.0)) {
        throw ParameterError("Student sampling requires nu > 2");
      }
      const double shape = model.nu / 2.0;
      const double b = (model.nu - 2.0) * model.sigma2 / 2.0;
      for (int t = 0; t < len; ++t) {
        const double tau = b / rng.gamma(shape, 1.0);
        v[t] = std::sqrt(tau) * rng.normal();
      }
      break;
    }
  }
  return v;
}

}  // namespace rsid
