#pragma once

#include <vector>

namespace rsid::stats {

/// Inverse standard-normal CDF (Wichura's PPND16 rational approximations),
/// accurate to full double precision on (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta function I_x(a, b) via Lentz's continued
/// fraction; a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of Student's t with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// Inverse CDF of Student's t (bisection on student_t_cdf).
double student_t_quantile(double p, double dof);

double mean(const std::vector<double>& v);
double median(std::vector<double> v);
double sample_variance(const std::vector<double>& v);

struct PairedTTest {
  double t_stat;
  double p_value;  // one-tailed: P(T > t_stat) under H0 "mean difference <= 0"
};

/// One-tailed paired t-test of H1: mean(a - b) > 0.
PairedTTest paired_t_test_one_tailed(const std::vector<double>& a,
                                     const std::vector<double>& b);

}  // namespace rsid::stats
