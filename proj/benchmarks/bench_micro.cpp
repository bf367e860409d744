// Microbenchmarks for the hot paths: kernel assembly, posterior solve, one
// EM sweep, and the end-to-end identification entry points.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "rsid/baseline.hpp"
#include "rsid/em.hpp"
#include "rsid/kernel.hpp"
#include "rsid/noise.hpp"
#include "rsid/posterior.hpp"
#include "rsid/rng.hpp"
#include "rsid/signals.hpp"

using Eigen::VectorXd;

namespace {

struct Fixture {
  rsid::Dataset data;
  double sigma2 = 0.0;
};

Fixture make_fixture(int N, int order) {
  const rsid::RationalSystem sys = rsid::random_system(order, 7, 900);
  const VectorXd g = sys.impulse(N);
  rsid::Rng in_rng(7, 901);
  VectorXd u(N);
  for (int t = 0; t < N; ++t) u[t] = in_rng.normal();
  const VectorXd y0 = rsid::simulate_output(g, u);
  const double var0 = (y0.array() - y0.mean()).square().sum() / N;
  const double sigma2 = 0.1 * var0;
  const VectorXd noise = rsid::sample_outlier_noise(sigma2, 0.1, N, 7, 902);
  Fixture f;
  f.data = rsid::simulate_system(g, u, noise);
  f.sigma2 = sigma2;
  return f;
}

void BM_KernelBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::build_kernel(n, 0.9));
  }
}
BENCHMARK(BM_KernelBuild)->Arg(50)->Arg(200);

void BM_PosteriorSolve(benchmark::State& state) {
  const Fixture f = make_fixture(200, 30);
  const int n = 50;
  const Eigen::MatrixXd U = rsid::toeplitz_regressor(f.data.u, n, 200);
  rsid::Hyperparameters theta;
  theta.lambda = 1.0;
  theta.beta = 0.9;
  theta.tau = VectorXd::Constant(200, f.sigma2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::evaluate_posterior(U, f.data.y, theta));
  }
}
BENCHMARK(BM_PosteriorSolve);

void BM_EMSweep(benchmark::State& state) {
  const Fixture f = make_fixture(200, 30);
  const int n = 50;
  // Warm-started single sweep isolates the per-iteration cost from the
  // grid initialization.
  const rsid::Estimate init = rsid::run_em(
      f.data, n, rsid::NoiseModel::laplacian(f.sigma2));
  rsid::EMOptions opt;
  opt.max_iter = 1;
  opt.init_theta = init.theta;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::run_em(
        f.data, n, rsid::NoiseModel::laplacian(f.sigma2), opt));
  }
}
BENCHMARK(BM_EMSweep);

void BM_BaselineGrid(benchmark::State& state) {
  const Fixture f = make_fixture(200, 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::fit_ss_ml(f.data, 50, f.sigma2));
  }
}
BENCHMARK(BM_BaselineGrid);

void BM_IdentifyLaplacian(benchmark::State& state) {
  const Fixture f = make_fixture(200, 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::run_em(
        f.data, 50, rsid::NoiseModel::laplacian(f.sigma2)));
  }
}
BENCHMARK(BM_IdentifyLaplacian);

void BM_IdentifyStudentAuto(benchmark::State& state) {
  const Fixture f = make_fixture(200, 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsid::run_em(
        f.data, 50, rsid::NoiseModel::student_auto(f.sigma2)));
  }
}
BENCHMARK(BM_IdentifyStudentAuto);

}  // namespace

BENCHMARK_MAIN();
