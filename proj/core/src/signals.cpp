#include "rsid/signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <system_error>

#include "rsid/errors.hpp"
#include "rsid/rng.hpp"

namespace rsid {

void validate_dataset(const Dataset& data) {
  if (data.u.size() != data.y.size()) {
    throw ShapeError("dataset input/output length mismatch");
  }
  if (data.y.size() < 1) throw DataError("dataset is empty");
  if (!data.u.allFinite() || !data.y.allFinite()) {
    throw DataError("dataset contains non-finite samples");
  }
  if ((data.u.array() == 0.0).all()) {
    throw DataError("dataset input is identically zero");
  }
}

Eigen::MatrixXd toeplitz_regressor(const Eigen::VectorXd& u, int n, int N) {
  if (n < 1 || N < 1) throw ParameterError("regressor dimensions must be >= 1");
  if (N > u.size()) throw ShapeError("regressor rows exceed input length");
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, n);
  for (int t = 0; t < N; ++t) {
    const int cols = std::min(n, t + 1);
    for (int i = 0; i < cols; ++i) U(t, i) = u[t - i];
  }
  return U;
}

Eigen::VectorXd simulate_output(const Eigen::VectorXd& g,
                                const Eigen::VectorXd& u) {
  const Eigen::Index N = u.size();
  const Eigen::Index n = g.size();
  if (n < 1 || N < 1) throw ShapeError("empty impulse response or input");
  Eigen::VectorXd y(N);
  for (Eigen::Index t = 0; t < N; ++t) {
    const Eigen::Index terms = std::min<Eigen::Index>(n, t + 1);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < terms; ++i) acc += g[i] * u[t - i];
    y[t] = acc;
  }
  return y;
}

Dataset simulate_system(const Eigen::VectorXd& g, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& noise) {
  if (noise.size() != u.size()) {
    throw ShapeError("noise length must match input length");
  }
  Dataset data;
  data.u = u;
  data.y = simulate_output(g, u) + noise;
  return data;
}

namespace {

// Real monic polynomial coefficients (highest degree first, leading 1) from
// roots; complex roots contribute through their upper-half-plane member only,
// as a real quadratic factor with the implied conjugate.
std::vector<double> poly_from_roots(
    const std::vector<std::complex<double>>& roots) {
  std::vector<double> coeffs{1.0};
  auto convolve = [&coeffs](const std::vector<double>& factor) {
    std::vector<double> out(coeffs.size() + factor.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      for (std::size_t j = 0; j < factor.size(); ++j) {
        out[i + j] += coeffs[i] * factor[j];
      }
    }
    coeffs = std::move(out);
  };
  for (const auto& r : roots) {
    if (r.imag() == 0.0) {
      convolve({1.0, -r.real()});
    } else if (r.imag() > 0.0) {
      convolve({1.0, -2.0 * r.real(), std::norm(r)});
    }
  }
  return coeffs;
}

}  // namespace

Eigen::VectorXd impulse_response(const std::vector<std::complex<double>>& zeros,
                                 const std::vector<std::complex<double>>& poles,
                                 double gain, int len) {
  if (len < 1) throw ParameterError("impulse length must be >= 1");
  if (poles.empty()) throw ParameterError("system needs at least one pole");
  const std::vector<double> a = poly_from_roots(poles);
  const std::vector<double> b = poly_from_roots(zeros);
  const int r = static_cast<int>(a.size()) - 1;
  const int q = static_cast<int>(b.size()) - 1;
  const int d = r - q;  // relative degree
  if (d < 1) throw ParameterError("system must be strictly proper");

  // h_k = gain*b_{k-d} - sum_{i=1..min(k,r)} a_i h_{k-i}, with h indexed from
  // 1; the numerator taps sit at lags d..d+q.
  Eigen::VectorXd h = Eigen::VectorXd::Zero(len);
  for (int k = 1; k <= len; ++k) {
    double acc = 0.0;
    if (k >= d && k - d <= q) acc = gain * b[k - d];
    const int terms = std::min(k - 1, r);
    for (int i = 1; i <= terms; ++i) acc -= a[i] * h[k - i - 1];
    h[k - 1] = acc;
  }
  return h;
}

Eigen::VectorXd RationalSystem::impulse(int len) const {
  return impulse_response(zeros, poles, gain, len);
}

RationalSystem random_system(int order, std::uint64_t seed,
                             std::uint64_t stream) {
  if (order < 1) throw ParameterError("system order must be >= 1");
  Rng rng(seed, stream);

  auto draw_roots = [&rng](int count, double mag_lo, double mag_hi) {
    std::vector<std::complex<double>> roots;
    roots.reserve(count);
    int pairs = count / 2;
    for (int i = 0; i < pairs; ++i) {
      const double mag = mag_lo + (mag_hi - mag_lo) * rng.uniform();
      const double phase = std::numbers::pi * rng.uniform();
      const std::complex<double> root = std::polar(mag, phase);
      roots.push_back(root);
      roots.push_back(std::conj(root));
    }
    if (count % 2 == 1) {
      const double mag = mag_lo + (mag_hi - mag_lo) * rng.uniform();
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      roots.emplace_back(sign * mag, 0.0);
    }
    return roots;
  };

  RationalSystem sys;
  sys.poles = draw_roots(order, 0.4, 0.95);
  sys.zeros = draw_roots(order - 1, 0.0, 0.95);
  sys.gain = 1.0;

  // Normalize to unit peak over a horizon long enough for the slowest
  // admissible pole (|p| <= 0.95) to have fully decayed, so that impulse()
  // is consistent for any requested length.
  const int horizon = std::max(100 * order, 64);
  const Eigen::VectorXd h = sys.impulse(horizon);
  const double peak = h.cwiseAbs().maxCoeff();
  sys.gain = 1.0 / peak;
  return sys;
}

Eigen::VectorXd sample_outlier_noise(double sigma2, double c, int len,
                                     std::uint64_t seed,
                                     std::uint64_t stream) {
  if (sigma2 <= 0.0) throw ParameterError("noise variance must be positive");
  if (!(c >= 0.0 && c <= 1.0)) {
    throw ParameterError("contamination probability outside [0, 1]");
  }
  if (len < 1) throw ParameterError("noise length must be >= 1");
  Rng rng(seed, stream);
  const double sd = std::sqrt(sigma2);
  Eigen::VectorXd v(len);
  for (int t = 0; t < len; ++t) {
    const bool outlier = rng.uniform() < c;
    v[t] = (outlier ? 10.0 * sd : sd) * rng.normal();
  }
  return v;
}

namespace {

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, int row) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(value)) {
    throw DataError("malformed numeric field in CSV row " +
                    std::to_string(row));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "u,y") {
    throw DataError("dataset CSV must start with header 'u,y': " + path);
  }
  std::vector<double> u, y;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    const std::size_t comma = sv.find(',');
    if (comma == std::string_view::npos) {
      throw DataError("missing field in CSV row " + std::to_string(row));
    }
    u.push_back(parse_double(trim(sv.substr(0, comma)), row));
    y.push_back(parse_double(trim(sv.substr(comma + 1)), row));
  }
  if (u.empty()) throw DataError("dataset CSV has no data rows: " + path);
  Dataset data;
  data.u = Eigen::Map<Eigen::VectorXd>(u.data(), u.size());
  data.y = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  if (data.u.size() != data.y.size()) {
    throw ShapeError("dataset input/output length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  out << "u,y\n";
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    out << format_double(data.u[k]) << ',' << format_double(data.y[k]) << '\n';
  }
  if (!out) throw DataError("failed writing dataset file: " + path);
}

}  // namespace rsid
