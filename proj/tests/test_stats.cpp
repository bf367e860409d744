#include <cmath>
#include <vector>

#include <doctest.h>

#include "rsid/errors.hpp"
#include "rsid/stats.hpp"

namespace {

// Student-t CDF by Simpson integration of the density -- an oracle that
// shares nothing with the incomplete-beta path used by the library.
double t_cdf_by_quadrature(double t, double dof) {
  const double logc = std::lgamma(0.5 * (dof + 1.0)) -
                      std::lgamma(0.5 * dof) -
                      0.5 * std::log(dof * 3.14159265358979323846);
  auto pdf = [&](double x) {
    return std::exp(logc - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
  };
  const int steps = 20000;  // even
  const double h = t / steps;
  double s = pdf(0.0) + pdf(t);
  for (int i = 1; i < steps; ++i) {
    s += (i % 2 == 1 ? 4.0 : 2.0) * pdf(i * h);
  }
  return 0.5 + s * h / 3.0;
}

}  // namespace

TEST_CASE("normal quantile against published values") {
  using rsid::stats::normal_quantile;
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.995) ==
        doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(normal_quantile(0.95) ==
        doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.9995) ==
        doctest::Approx(3.2905267314919255).epsilon(1e-10));
  // Symmetry.
  for (double p : {0.01, 0.1, 0.3, 0.45}) {
    CHECK(normal_quantile(p) ==
          doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), rsid::ParameterError);
  CHECK_THROWS_AS(normal_quantile(1.0), rsid::ParameterError);
}

TEST_CASE("regularized incomplete beta closed forms") {
  using rsid::stats::regularized_incomplete_beta;
  for (double x : {0.05, 0.3, 0.5, 0.77, 0.99}) {
    // I_x(1,1) = x
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) ==
          doctest::Approx(x).epsilon(1e-12));
    // I_x(2,2) = x^2 (3 - 2x)
    CHECK(regularized_incomplete_beta(2.0, 2.0, x) ==
          doctest::Approx(x * x * (3.0 - 2.0 * x)).epsilon(1e-12));
    // I_x(1,b) = 1 - (1-x)^b
    CHECK(regularized_incomplete_beta(1.0, 4.5, x) ==
          doctest::Approx(1.0 - std::pow(1.0 - x, 4.5)).epsilon(1e-12));
  }
  CHECK(regularized_incomplete_beta(3.3, 3.3, 0.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student t cdf closed forms and quadrature oracle") {
  using rsid::stats::student_t_cdf;
  // dof = 1: F(t) = 1/2 + atan(t)/pi
  CHECK(student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  // dof = 2: F(t) = 1/2 + t / (2 sqrt(2 + t^2))
  CHECK(student_t_cdf(1.0, 2.0) ==
        doctest::Approx(0.5 + 1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-12));
  // Large dof approaches the normal CDF.
  CHECK(student_t_cdf(1.959963984540054, 1e6) ==
        doctest::Approx(0.975).epsilon(1e-5));
  for (double dof : {3.0, 7.0, 24.0}) {
    for (double t : {0.3, 1.7, 4.2}) {
      CHECK(student_t_cdf(t, dof) ==
            doctest::Approx(t_cdf_by_quadrature(t, dof)).epsilon(1e-9));
      CHECK(student_t_cdf(-t, dof) ==
            doctest::Approx(1.0 - t_cdf_by_quadrature(t, dof)).epsilon(1e-9));
    }
  }
}

TEST_CASE("student t quantile round trip and table value") {
  using rsid::stats::student_t_cdf;
  using rsid::stats::student_t_quantile;
  CHECK(student_t_quantile(0.975, 10.0) ==
        doctest::Approx(2.2281388519).epsilon(1e-6));
  for (double dof : {2.0, 5.0, 30.0}) {
    for (double p : {0.6, 0.9, 0.975, 0.995}) {
      const double q = student_t_quantile(p, dof);
      CHECK(student_t_cdf(q, dof) == doctest::Approx(p).epsilon(1e-8));
    }
  }
}

TEST_CASE("descriptive statistics") {
  using namespace rsid::stats;
  const std::vector<double> v{3.0, 1.0, 2.0, 5.0};
  CHECK(mean(v) == doctest::Approx(2.75).epsilon(1e-15));
  CHECK(median(v) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(median(std::vector<double>{9.0, 1.0, 4.0}) ==
        doctest::Approx(4.0).epsilon(1e-15));
  // Sample variance of {1,2,3,4} = 5/3.
  CHECK(sample_variance(std::vector<double>{1.0, 2.0, 3.0, 4.0}) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("paired one-tailed t test") {
  using rsid::stats::paired_t_test_one_tailed;
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b{0.5, 1.8, 2.2, 3.9, 4.0};
  // Differences: 0.5 0.2 0.8 0.1 1.0 -> mean .52, sample sd sqrt(.147).
  const auto r = paired_t_test_one_tailed(a, b);
  const double expect_t = 0.52 / std::sqrt(0.147 / 5.0);
  CHECK(r.t_stat == doctest::Approx(expect_t).epsilon(1e-12));
  CHECK(r.p_value ==
        doctest::Approx(1.0 - t_cdf_by_quadrature(expect_t, 4.0))
            .epsilon(1e-7));
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value < 0.05);

  // Degenerate: zero-variance differences.
  const auto same = paired_t_test_one_tailed(a, a);
  CHECK(same.p_value == 1.0);
  std::vector<double> shifted = a;
  for (auto& x : shifted) x += 1.0;
  const auto up = paired_t_test_one_tailed(shifted, a);
  CHECK(up.p_value == 0.0);

  CHECK_THROWS_AS(paired_t_test_one_tailed(a, std::vector<double>{1.0}),
                  rsid::ShapeError);
  CHECK_THROWS_AS(paired_t_test_one_tailed(std::vector<double>{1.0},
                                           std::vector<double>{2.0}),
                  rsid::ParameterError);
}
