#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsid {

/// An identification method the harness can run. Text forms accepted by
/// parse(): "em-l", "em-s", "ss-ml", "em-s-fixed:<nu>", "em-l-p:<p>",
/// "em-s-opt".
struct MethodSpec {
  enum class Kind {
    EmLaplacian,
    EmStudentAuto,
    EmStudentFixed,
    EmLaplacianGrouped,
    SsMl,
    EmStudentOracle,  ///< best fixed nu in hindsight; peeks at the truth
  };

  Kind kind = Kind::EmStudentAuto;
  double nu = 0.0;  ///< EmStudentFixed only
  int groups = 0;   ///< EmLaplacianGrouped only

  /// Report label, e.g. "EM-S", "EM-S-fixed(5)", "EM-L-p(4)",
  /// "EM-S-opt(oracle)" — the oracle advertises itself.
  std::string label() const;

  static MethodSpec parse(const std::string& text);
};

/// Noise generation scenario for the Monte Carlo runs: a two-component
/// Gaussian mixture with 100x variance inflation, or Student's t with the
/// given degrees of freedom.
struct NoiseScenario {
  enum class Kind { OutlierMixture, StudentNoise };
  Kind kind = Kind::OutlierMixture;
  double nu = 3.0;  ///< StudentNoise only
};

struct BenchConfig {
  int runs = 50;
  int n_samples = 200;    ///< data length N per run
  int kernel_order = 50;  ///< impulse-response taps estimated
  int system_order = 30;  ///< order of the random true systems
  double outlier_prob = 0.1;    ///< mixture scenario contamination rate
  double noise_fraction = 0.1;  ///< noise variance as a fraction of the
                                ///< noiseless output variance, per run
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 1;
  NoiseScenario scenario;
  int jobs = 1;  ///< worker threads; results are identical for any value
};

struct RunRecord {
  int run = 0;
  std::string method;
  double fit = 0.0;  ///< NaN when the method failed on this run
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string error;  ///< empty on success
};

struct MethodSummary {
  std::string method;
  double mean = 0.0;
  double median = 0.0;
  double ci95_halfwidth = 0.0;  ///< Student-t 95% half-width of the mean
};

/// One-tailed paired comparison: positive t favors method_a.
struct PairedStat {
  std::string method_a;
  std::string method_b;
  double t_stat = 0.0;
  double p_value = 1.0;
};

struct FitReport {
  std::vector<RunRecord> records;       ///< run-major, config method order
  std::vector<MethodSummary> summaries; ///< config method order
  std::vector<PairedStat> pairs;        ///< all unordered method pairs
};

/// Impulse-response fit on [0, 1]-ish scale: 1 - ||g_true - g_hat|| /
/// ||g_true||; 1 is perfect, 0 is as bad as the zero estimate.
double fit_score(const Eigen::VectorXd& g_true, const Eigen::VectorXd& g_hat);

/// Output-prediction fit: 1 - ||y_test - y_pred|| / ||y_test - mean||.
double prediction_fit(const Eigen::VectorXd& y_test,
                      const Eigen::VectorXd& y_pred);

/// Runs the full Monte Carlo comparison: per run, draw a random system,
/// unit-variance Gaussian input, noise at the configured variance fraction;
/// fit every method on the identical dataset with the noise floor
/// re-estimated from that dataset; score against the true response truncated
/// to kernel_order. Per-method failures are recorded in their records, never
/// fatal. Everything except wall_time_s is a deterministic function of the
/// config.
FitReport run_monte_carlo(const BenchConfig& config);

/// CSV with header run,method,fit,iterations,wall_time_s.
void write_report_csv(const FitReport& report, const std::string& path);

/// JSON with per-method {mean, median, ci95_halfwidth} and, when two or more
/// methods ran, pairwise {t_stat, p_value}.
void write_summary_json(const FitReport& report, const std::string& path);

}  // namespace rsid
