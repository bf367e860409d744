#include "rsid/bench.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>
#include <thread>
#include <utility>

#include <json.hpp>

#include "rsid/baseline.hpp"
#include "rsid/em.hpp"
#include "rsid/errors.hpp"
#include "rsid/rng.hpp"
#include "rsid/signals.hpp"
#include "rsid/stats.hpp"

namespace rsid {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_suffix_number(const std::string& text, std::size_t pos,
                           const std::string& what) {
  const std::string body = text.substr(pos);
  if (body == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res =
      std::from_chars(body.data(), body.data() + body.size(), value);
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) {
    throw ParameterError("cannot parse " + what + " in method spec '" + text +
                         "'");
  }
  return value;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RunInputs {
  Dataset data;
  Eigen::VectorXd g_true;  // truncated to the estimated length
  bool failed = false;
  std::string error;
};

RunInputs generate_run(const BenchConfig& cfg, int run) {
  const auto stream = static_cast<std::uint64_t>(run) * 4;
  RunInputs in;
  try {
    const RationalSystem system =
        random_system(cfg.system_order, cfg.seed, stream);

    Rng input_rng(cfg.seed, stream + 1);
    Eigen::VectorXd u(cfg.n_samples);
    for (int t = 0; t < cfg.n_samples; ++t) u[t] = input_rng.normal();

    const Eigen::VectorXd g_full = system.impulse(cfg.n_samples);
    const Eigen::VectorXd y0 = simulate_output(g_full, u);
    const double var0 =
        (y0.array() - y0.mean()).square().sum() / cfg.n_samples;
    if (!(var0 > 0.0)) {
      throw DataError("noiseless output is constant; cannot scale noise");
    }
    const double sigma2 = cfg.noise_fraction * var0;

    Eigen::VectorXd noise;
    if (cfg.scenario.kind == NoiseScenario::Kind::OutlierMixture) {
      noise = sample_outlier_noise(sigma2, cfg.outlier_prob, cfg.n_samples,
                                   cfg.seed, stream + 2);
    } else {
      noise = sample_noise(NoiseModel::student(sigma2, cfg.scenario.nu),
                           cfg.n_samples, cfg.seed, stream + 2);
    }

    in.data = simulate_system(g_full, u, noise);
    in.g_true = system.impulse(cfg.kernel_order);
  } catch (const std::exception& e) {
    in.failed = true;
    in.error = e.what();
  }
  return in;
}

// Fits every configured method on one run's data. The noise floor and the
// marginal-likelihood baseline are computed once and shared: the baseline IS
// the SS-ML method's estimate and warm-starts the EM variants, so its cost
// is reported on the SS-ML row.
std::vector<RunRecord> fit_run(const BenchConfig& cfg, int run,
                               const RunInputs& in) {
  std::vector<RunRecord> records(cfg.methods.size());
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    records[m].run = run;
    records[m].method = cfg.methods[m].label();
    records[m].fit = kNaN;
  }
  auto fail_all = [&](const std::string& why) {
    for (auto& rec : records) rec.error = why;
  };
  if (in.failed) {
    fail_all(in.error);
    return records;
  }

  double sigma2_hat = 0.0;
  Estimate ml;
  double shared_time = 0.0;
  try {
    const auto start = Clock::now();
    sigma2_hat = estimate_noise_variance(
        in.data, default_fir_order(cfg.n_samples, cfg.kernel_order));
    ml = fit_ss_ml(in.data, cfg.kernel_order, sigma2_hat);
    shared_time = seconds_since(start);
  } catch (const std::exception& e) {
    fail_all(e.what());
    return records;
  }

  Hyperparameters warm;
  warm.lambda = ml.theta.lambda;
  warm.beta = ml.theta.beta;
  warm.tau = Eigen::VectorXd::Constant(cfg.n_samples, sigma2_hat);

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const MethodSpec& spec = cfg.methods[m];
    RunRecord& rec = records[m];
    try {
      const auto start = Clock::now();
      EMOptions opts;
      opts.init_theta = warm;
      switch (spec.kind) {
        case MethodSpec::Kind::SsMl:
          rec.fit = fit_score(in.g_true, ml.g_hat);
          rec.iterations = ml.trace.iterations;
          rec.wall_time_s = shared_time;
          continue;
        case MethodSpec::Kind::EmLaplacian: {
          const Estimate est = run_em(in.data, cfg.kernel_order,
                                      NoiseModel::laplacian(sigma2_hat), opts);
          rec.fit = fit_score(in.g_true, est.g_hat);
          rec.iterations = est.trace.iterations;
          break;
        }
        case MethodSpec::Kind::EmStudentAuto: {
          const Estimate est =
              run_em(in.data, cfg.kernel_order,
                     NoiseModel::student_auto(sigma2_hat), opts);
          rec.fit = fit_score(in.g_true, est.g_hat);
          rec.iterations = est.trace.iterations;
          break;
        }
        case MethodSpec::Kind::EmStudentFixed: {
          const Estimate est =
              run_em(in.data, cfg.kernel_order,
                     NoiseModel::student(sigma2_hat, spec.nu), opts);
          rec.fit = fit_score(in.g_true, est.g_hat);
          rec.iterations = est.trace.iterations;
          break;
        }
        case MethodSpec::Kind::EmLaplacianGrouped: {
          EMOptions grouped = opts;
          grouped.grouping = Grouping(cfg.n_samples, spec.groups);
          Hyperparameters init = warm;
          init.upsilon = Eigen::VectorXd::Constant(spec.groups, sigma2_hat);
          grouped.init_theta = init;
          const Estimate est =
              run_em(in.data, cfg.kernel_order,
                     NoiseModel::laplacian(sigma2_hat), grouped);
          rec.fit = fit_score(in.g_true, est.g_hat);
          rec.iterations = est.trace.iterations;
          break;
        }
        case MethodSpec::Kind::EmStudentOracle: {
          // Best fixed nu in hindsight: fit the whole grid and keep the
          // highest score. Ties keep the earlier (smaller) candidate.
          double best_fit = -std::numeric_limits<double>::infinity();
          int best_iter = 0;
          for (const double nu : default_nu_grid()) {
            const Estimate est = run_em(in.data, cfg.kernel_order,
                                        NoiseModel::student(sigma2_hat, nu),
                                        opts);
            const double fit = fit_score(in.g_true, est.g_hat);
            if (fit > best_fit) {
              best_fit = fit;
              best_iter = est.trace.iterations;
            }
          }
          rec.fit = best_fit;
          rec.iterations = best_iter;
          break;
        }
      }
      rec.wall_time_s = seconds_since(start);
    } catch (const std::exception& e) {
      rec.fit = kNaN;
      rec.iterations = 0;
      rec.error = e.what();
    }
  }
  return records;
}

void check_config(const BenchConfig& cfg) {
  if (cfg.runs < 1) throw ParameterError("runs must be >= 1");
  if (cfg.n_samples < 2) throw ParameterError("N must be >= 2");
  if (cfg.kernel_order < 1) throw ParameterError("n must be >= 1");
  if (cfg.system_order < 1) throw ParameterError("order must be >= 1");
  if (!(cfg.outlier_prob >= 0.0 && cfg.outlier_prob <= 1.0)) {
    throw ParameterError("outlier probability must lie in [0, 1]");
  }
  if (!(cfg.noise_fraction > 0.0)) {
    throw ParameterError("noise fraction must be positive");
  }
  if (cfg.methods.empty()) throw ParameterError("no methods requested");
  if (cfg.jobs < 1) throw ParameterError("jobs must be >= 1");
  if (cfg.scenario.kind == NoiseScenario::Kind::StudentNoise &&
      !(cfg.scenario.nu > 2.0)) {
    throw ParameterError("Student scenario requires nu > 2");
  }
}

std::vector<double> finite_fits(const FitReport& report,
                                const std::string& method) {
  std::vector<double> fits;
  for (const auto& rec : report.records) {
    if (rec.method == method && std::isfinite(rec.fit)) {
      fits.push_back(rec.fit);
    }
  }
  return fits;
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::EmLaplacian:
      return "EM-L";
    case Kind::EmStudentAuto:
      return "EM-S";
    case Kind::SsMl:
      return "SS-ML";
    case Kind::EmStudentFixed:
      return "EM-S-fixed(" +
             (std::isinf(nu) ? std::string("inf") : format_double(nu)) + ")";
    case Kind::EmLaplacianGrouped:
      return "EM-L-p(" + std::to_string(groups) + ")";
    case Kind::EmStudentOracle:
      return "EM-S-opt(oracle)";
  }
  throw ParameterError("invalid method kind");
}

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec spec;
  if (text == "em-l") {
    spec.kind = Kind::EmLaplacian;
  } else if (text == "em-s") {
    spec.kind = Kind::EmStudentAuto;
  } else if (text == "ss-ml") {
    spec.kind = Kind::SsMl;
  } else if (text == "em-s-opt") {
    spec.kind = Kind::EmStudentOracle;
  } else if (text.rfind("em-s-fixed:", 0) == 0) {
    spec.kind = Kind::EmStudentFixed;
    spec.nu = parse_suffix_number(text, 11, "nu");
    if (!(spec.nu > 2.0)) {
      throw ParameterError("fixed nu must exceed 2 in '" + text + "'");
    }
  } else if (text.rfind("em-l-p:", 0) == 0) {
    spec.kind = Kind::EmLaplacianGrouped;
    const double p = parse_suffix_number(text, 7, "group count");
    if (!(p >= 1.0 && p <= 1e9) || p != std::floor(p)) {
      throw ParameterError("group count must be a positive integer in '" +
                           text + "'");
    }
    spec.groups = static_cast<int>(p);
  } else {
    throw ParameterError("unknown method '" + text +
                         "' (expected em-l, em-s, ss-ml, em-s-fixed:<nu>, "
                         "em-l-p:<p>, or em-s-opt)");
  }
  return spec;
}

double fit_score(const Eigen::VectorXd& g_true, const Eigen::VectorXd& g_hat) {
  if (g_true.size() != g_hat.size()) {
    throw ShapeError("fit_score length mismatch");
  }
  const double norm_true = g_true.norm();
  if (!(norm_true > 0.0)) {
    throw ParameterError("true response is identically zero");
  }
  return 1.0 - (g_true - g_hat).norm() / norm_true;
}

double prediction_fit(const Eigen::VectorXd& y_test,
                      const Eigen::VectorXd& y_pred) {
  if (y_test.size() != y_pred.size()) {
    throw ShapeError("prediction_fit length mismatch");
  }
  const double spread = (y_test.array() - y_test.mean()).matrix().norm();
  if (!(spread > 0.0)) {
    throw ParameterError("test output is constant");
  }
  return 1.0 - (y_test - y_pred).norm() / spread;
}

FitReport run_monte_carlo(const BenchConfig& config) {
  check_config(config);

  std::vector<std::vector<RunRecord>> per_run(config.runs);
  const int workers =
      std::min(config.jobs, config.runs);
  if (workers <= 1) {
    for (int r = 0; r < config.runs; ++r) {
      per_run[r] = fit_run(config, r, generate_run(config, r));
    }
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (int r = next.fetch_add(1); r < config.runs;
           r = next.fetch_add(1)) {
        per_run[r] = fit_run(config, r, generate_run(config, r));
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  FitReport report;
  report.records.reserve(static_cast<std::size_t>(config.runs) *
                         config.methods.size());
  for (auto& run_records : per_run) {
    for (auto& rec : run_records) report.records.push_back(std::move(rec));
  }

  for (const MethodSpec& spec : config.methods) {
    MethodSummary s;
    s.method = spec.label();
    const std::vector<double> fits = finite_fits(report, s.method);
    if (fits.empty()) {
      s.mean = s.median = s.ci95_halfwidth = kNaN;
    } else {
      s.mean = stats::mean(fits);
      s.median = stats::median(fits);
      if (fits.size() >= 2) {
        const double sd = std::sqrt(stats::sample_variance(fits));
        s.ci95_halfwidth =
            stats::student_t_quantile(0.975,
                                      static_cast<double>(fits.size() - 1)) *
            sd / std::sqrt(static_cast<double>(fits.size()));
      } else {
        s.ci95_halfwidth = kNaN;
      }
    }
    report.summaries.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < config.methods.size(); ++j) {
      const std::string a = config.methods[i].label();
      const std::string b = config.methods[j].label();
      // Pair the per-run scores; skip runs where either method failed.
      std::vector<double> fits_a;
      std::vector<double> fits_b;
      for (int r = 0; r < config.runs; ++r) {
        const RunRecord& ra =
            report.records[static_cast<std::size_t>(r) *
                               config.methods.size() + i];
        const RunRecord& rb =
            report.records[static_cast<std::size_t>(r) *
                               config.methods.size() + j];
        if (std::isfinite(ra.fit) && std::isfinite(rb.fit)) {
          fits_a.push_back(ra.fit);
          fits_b.push_back(rb.fit);
        }
      }
      PairedStat p;
      p.method_a = a;
      p.method_b = b;
      if (fits_a.size() >= 2) {
        const stats::PairedTTest t =
            stats::paired_t_test_one_tailed(fits_a, fits_b);
        p.t_stat = t.t_stat;
        p.p_value = t.p_value;
      } else {
        p.t_stat = kNaN;
        p.p_value = kNaN;
      }
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

void write_report_csv(const FitReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "run,method,fit,iterations,wall_time_s\n";
  for (const auto& rec : report.records) {
    out << rec.run << ',' << rec.method << ',' << format_double(rec.fit)
        << ',' << rec.iterations << ',' << format_double(rec.wall_time_s)
        << '\n';
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

void write_summary_json(const FitReport& report, const std::string& path) {
  nlohmann::json doc;
  auto& methods = doc["methods"] = nlohmann::json::object();
  for (const auto& s : report.summaries) {
    methods[s.method] = {{"mean", s.mean},
                         {"median", s.median},
                         {"ci95_halfwidth", s.ci95_halfwidth}};
  }
  if (!report.pairs.empty()) {
    auto& pairs = doc["pairs"] = nlohmann::json::array();
    for (const auto& p : report.pairs) {
      pairs.push_back({{"method_a", p.method_a},
                       {"method_b", p.method_b},
                       {"t_stat", p.t_stat},
                       {"p_value", p.p_value}});
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

}  // namespace rsid
