#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsid {

/// One identification record: u[k] holds input sample u_k (k = 0..N-1) and
/// y[k] holds output sample y_{k+1}; the system is at rest before t = 0.
struct Dataset {
  Eigen::VectorXd u;
  Eigen::VectorXd y;

  Eigen::Index size() const { return y.size(); }
};

/// Throws unless u and y have equal positive length, all samples are finite,
/// and at least one input sample is nonzero.
void validate_dataset(const Dataset& data);

/// N x n Toeplitz regressor: row t (0-based), column i holds u_{t-i} with
/// u_k = 0 for k < 0, so that y = U g + v.
Eigen::MatrixXd toeplitz_regressor(const Eigen::VectorXd& u, int n, int N);

/// Noise-free convolution output of length u.size(): y_t = sum_i g_i u_{t-i}
/// under zero initial conditions.
Eigen::VectorXd simulate_output(const Eigen::VectorXd& g,
                                const Eigen::VectorXd& u);

/// Dataset with y = U g + noise.
Dataset simulate_system(const Eigen::VectorXd& g, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& noise);

/// Impulse response of B(z)/A(z) scaled by gain, where A and B are the monic
/// polynomials with the given roots (conjugate roots must come in pairs so
/// the coefficients are real); len taps starting at g_1.
Eigen::VectorXd impulse_response(const std::vector<std::complex<double>>& zeros,
                                 const std::vector<std::complex<double>>& poles,
                                 double gain, int len);

/// A randomly drawn stable rational system of the given order: pole
/// magnitudes uniform in [0.4, 0.95], zero magnitudes in [0, 0.95], both in
/// conjugate pairs (plus one real root when the count is odd), relative
/// degree 1. The gain is fixed at construction so that the impulse response
/// has unit peak magnitude; impulse(len) is consistent across lengths.
struct RationalSystem {
  std::vector<std::complex<double>> poles;
  std::vector<std::complex<double>> zeros;
  double gain = 1.0;

  Eigen::VectorXd impulse(int len) const;
};

RationalSystem random_system(int order, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// I.i.d. contaminated Gaussian noise: each sample is N(0, sigma2) with
/// probability 1-c and N(0, 100*sigma2) with probability c.
Eigen::VectorXd sample_outlier_noise(double sigma2, double c, int len,
                                     std::uint64_t seed,
                                     std::uint64_t stream = 0);

/// CSV dataset format: header "u,y"; data row k (1-based) holds u_{k-1},y_k.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

}  // namespace rsid
