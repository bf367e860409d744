#include <cmath>

#include <doctest.h>
#include <Eigen/Dense>

#include "rsid/errors.hpp"
#include "rsid/kernel.hpp"
#include "rsid/posterior.hpp"
#include "rsid/rng.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using rsid::Hyperparameters;

namespace {

Hyperparameters scalar_theta() {
  Hyperparameters theta;
  theta.lambda = 2.0;
  theta.beta = 0.5;
  theta.tau = VectorXd::Ones(1);
  return theta;
}

}  // namespace

TEST_CASE("scalar posterior pinned values") {
  // U = [1], y = [2], lambda*K = 1, tau = 1:
  // A = 2, P = 1/2, g_hat = 1, eps = (2-1)^2 + 1/2, d = 1^2 + 1/2.
  MatrixXd U(1, 1);
  U << 1.0;
  VectorXd y(1);
  y << 2.0;
  const auto theta = scalar_theta();

  const auto [g, P] = rsid::compute_posterior(U, y, theta);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(P(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  const rsid::PosteriorState st = rsid::evaluate_posterior(U, y, theta);
  CHECK(st.g_hat[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.y_hat[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.s_diag[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(st.eps[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(st.dg_hat[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.h_diag[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(st.d[0] == doctest::Approx(1.5).epsilon(1e-12));
  // log N(2; 0, 2) = -(log(2 pi) + log 2 + 2)/2.
  CHECK(st.gauss_loglik ==
        doctest::Approx(-2.2655121234846453).epsilon(1e-12));
}

TEST_CASE("random posteriors match the covariance-form oracle") {
  rsid::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 10);
    const int N = n + static_cast<int>(rng.uniform() * 10);
    MatrixXd U(N, n);
    VectorXd y(N), tau(N);
    for (int i = 0; i < N; ++i) {
      y[i] = 2.0 * rng.normal();
      tau[i] = 0.05 + 2.0 * rng.uniform();
      for (int j = 0; j < n; ++j) U(i, j) = rng.normal();
    }
    Hyperparameters theta;
    theta.lambda = 0.1 + 10.0 * rng.uniform();
    theta.beta = 0.3 + 0.65 * rng.uniform();
    theta.tau = tau;

    const auto [g, P] = rsid::compute_posterior(U, y, theta);
    const VectorXd g_oracle =
        test_util::dense_posterior_mean(U, y, theta.lambda, theta.beta, tau);
    CHECK((g - g_oracle).norm() <= 1e-8 * (1.0 + g_oracle.norm()));

    // P equals the information-matrix inverse computed densely.
    const MatrixXd K = test_util::dense_kernel(n, theta.beta);
    const MatrixXd A =
        U.transpose() * tau.cwiseInverse().asDiagonal() * U +
        (theta.lambda * K).inverse();
    CHECK((A * P - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("evidence matches the dense Sigma_y evaluation") {
  rsid::Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4, N = 9;
    MatrixXd U(N, n);
    VectorXd y(N), tau(N);
    for (int i = 0; i < N; ++i) {
      y[i] = rng.normal();
      tau[i] = 0.1 + rng.uniform();
      for (int j = 0; j < n; ++j) U(i, j) = rng.normal();
    }
    Hyperparameters theta;
    theta.lambda = 0.5 + 2.0 * rng.uniform();
    theta.beta = 0.4 + 0.5 * rng.uniform();
    theta.tau = tau;

    const rsid::PosteriorState st = rsid::evaluate_posterior(U, y, theta);
    const double expect =
        -0.5 * (N * std::log(2.0 * 3.14159265358979323846) +
                test_util::dense_ml_objective(U, y, theta.lambda, theta.beta,
                                              tau));
    CHECK(st.gauss_loglik == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("map objective pinned value and prior dispatch") {
  MatrixXd U(1, 1);
  U << 1.0;
  VectorXd y(1);
  y << 2.0;
  const auto theta = scalar_theta();

  // Laplacian: gauss_loglik + log p(tau=1 | sigma2=1) = -2.2655... - 1.
  CHECK(rsid::map_objective(theta, U, y, rsid::NoiseModel::laplacian(1.0)) ==
        doctest::Approx(-3.2655121234846453).epsilon(1e-12));
  // Gaussian: no prior term.
  CHECK(rsid::map_objective(theta, U, y, rsid::NoiseModel::gaussian(1.0)) ==
        doctest::Approx(-2.2655121234846453).epsilon(1e-12));
  // Grouped: the prior runs over upsilon.
  Hyperparameters grouped = theta;
  grouped.upsilon = VectorXd::Ones(1);
  CHECK(rsid::map_objective(grouped, U, y,
                            rsid::NoiseModel::laplacian(1.0)) ==
        doctest::Approx(-3.2655121234846453).epsilon(1e-12));
}

TEST_CASE("credibility bounds use the 99 percent normal quantile") {
  VectorXd g(2);
  g << 1.0, -0.5;
  MatrixXd P = MatrixXd::Zero(2, 2);
  P(0, 0) = 0.04;
  P(1, 1) = 1.0;
  const auto cb = rsid::credibility_bounds(g, P);
  const double z = 2.5758293035489004;
  CHECK(cb.lower[0] == doctest::Approx(1.0 - z * 0.2).epsilon(1e-12));
  CHECK(cb.upper[0] == doctest::Approx(1.0 + z * 0.2).epsilon(1e-12));
  CHECK(cb.lower[1] == doctest::Approx(-0.5 - z).epsilon(1e-12));
  CHECK(cb.upper[1] == doctest::Approx(-0.5 + z).epsilon(1e-12));

  const auto narrow = rsid::credibility_bounds(g, P, 0.5);
  CHECK(narrow.upper[0] - narrow.lower[0] < cb.upper[0] - cb.lower[0]);
  CHECK_THROWS_AS(rsid::credibility_bounds(g, P, 0.0), rsid::ParameterError);
  CHECK_THROWS_AS(rsid::credibility_bounds(g, P, 1.0), rsid::ParameterError);

  // A negative rounding artifact on the diagonal is clamped, not propagated.
  MatrixXd tiny = P;
  tiny(1, 1) = -1e-18;
  const auto clamped = rsid::credibility_bounds(g, tiny);
  CHECK(clamped.lower[1] == clamped.upper[1]);
}

TEST_CASE("posterior shape validation") {
  MatrixXd U(3, 2);
  U.setOnes();
  VectorXd y(3);
  y.setOnes();
  Hyperparameters theta;
  theta.tau = VectorXd::Ones(2);  // wrong length
  CHECK_THROWS_AS(rsid::compute_posterior(U, y, theta), rsid::ShapeError);
  theta.tau = VectorXd::Ones(3);
  theta.lambda = -1.0;
  CHECK_THROWS_AS(rsid::compute_posterior(U, y, theta),
                  rsid::ParameterError);
  theta.lambda = 1.0;
  theta.beta = 1.5;
  CHECK_THROWS_AS(rsid::compute_posterior(U, y, theta),
                  rsid::ParameterError);
  theta.beta = 0.5;
  theta.tau[1] = 0.0;
  CHECK_THROWS_AS(rsid::compute_posterior(U, y, theta),
                  rsid::ParameterError);
}

TEST_CASE("conditioning failure surfaces as the dedicated error") {
  // Overflowing information matrix: every jitter escalation fails too.
  MatrixXd U(2, 2);
  U << 1e200, 1e200, 1e200, 1e200;
  VectorXd y(2);
  y << 1.0, 1.0;
  Hyperparameters theta;
  theta.lambda = 1.0;
  theta.beta = 0.5;
  theta.tau = VectorXd::Ones(2);
  try {
    rsid::compute_posterior(U, y, theta);
    FAIL("expected ConditioningError");
  } catch (const rsid::ConditioningError& e) {
    CHECK(e.lambda == 1.0);
    CHECK(e.beta == 0.5);
    CHECK(e.min_tau == 1.0);
  }
}
