// Command-line front end: simulate datasets, identify impulse responses from
// CSV records, and run Monte Carlo method comparisons.
//
// Exit codes: 0 success; 2 usage, validation, or data errors; 3 numerical
// failure (a positive-definite solve broke down despite jitter escalation).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsid/baseline.hpp"
#include "rsid/bench.hpp"
#include "rsid/em.hpp"
#include "rsid/errors.hpp"
#include "rsid/rng.hpp"
#include "rsid/signals.hpp"

namespace {

using nlohmann::json;

json to_json_array(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw rsid::DataError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out.flush()) throw rsid::DataError("write to '" + path + "' failed");
}

rsid::NoiseScenario parse_scenario(const std::string& text) {
  rsid::NoiseScenario scenario;
  if (text == "mixture") {
    scenario.kind = rsid::NoiseScenario::Kind::OutlierMixture;
  } else if (text.rfind("student:", 0) == 0) {
    scenario.kind = rsid::NoiseScenario::Kind::StudentNoise;
    try {
      scenario.nu = std::stod(text.substr(8));
    } catch (const std::exception&) {
      throw rsid::ParameterError("cannot parse degrees of freedom in '" +
                                 text + "'");
    }
    if (!(scenario.nu > 2.0)) {
      throw rsid::ParameterError("scenario requires nu > 2");
    }
  } else {
    throw rsid::ParameterError(
        "unknown scenario '" + text +
        "' (expected mixture or student:<nu>)");
  }
  return scenario;
}

std::string scenario_text(const rsid::NoiseScenario& s) {
  if (s.kind == rsid::NoiseScenario::Kind::OutlierMixture) return "mixture";
  return "student:" + std::to_string(s.nu);
}

struct SimulateArgs {
  int order = 30;
  int n_samples = 200;
  double outlier_prob = 0.1;
  double noise_fraction = 0.1;
  std::string scenario = "mixture";
  std::uint64_t seed = 1;
  std::string output;
  std::string truth;
};

int run_simulate(const SimulateArgs& args) {
  if (args.order < 1) throw rsid::ParameterError("--order must be >= 1");
  if (args.n_samples < 1) throw rsid::ParameterError("--N must be >= 1");
  if (!(args.outlier_prob >= 0.0 && args.outlier_prob <= 1.0)) {
    throw rsid::ParameterError("--outlier-prob must lie in [0, 1]");
  }
  if (!(args.noise_fraction > 0.0)) {
    throw rsid::ParameterError("--noise-fraction must be positive");
  }
  const rsid::NoiseScenario scenario = parse_scenario(args.scenario);

  // Streams 0..2 of the seed: system, input, noise — identical to run 0 of a
  // benchmark with the same seed.
  const rsid::RationalSystem system =
      rsid::random_system(args.order, args.seed, 0);
  rsid::Rng input_rng(args.seed, 1);
  Eigen::VectorXd u(args.n_samples);
  for (int t = 0; t < args.n_samples; ++t) u[t] = input_rng.normal();

  const Eigen::VectorXd g = system.impulse(args.n_samples);
  const Eigen::VectorXd y0 = rsid::simulate_output(g, u);
  const double var0 =
      (y0.array() - y0.mean()).square().sum() / args.n_samples;
  if (!(var0 > 0.0)) {
    throw rsid::DataError("noiseless output is constant; cannot scale noise");
  }
  const double sigma2 = args.noise_fraction * var0;

  Eigen::VectorXd noise;
  if (scenario.kind == rsid::NoiseScenario::Kind::OutlierMixture) {
    noise = rsid::sample_outlier_noise(sigma2, args.outlier_prob,
                                       args.n_samples, args.seed, 2);
  } else {
    noise = rsid::sample_noise(rsid::NoiseModel::student(sigma2, scenario.nu),
                               args.n_samples, args.seed, 2);
  }

  rsid::write_dataset_csv(args.output,
                          rsid::simulate_system(g, u, noise));

  if (!args.truth.empty()) {
    json doc;
    doc["g"] = to_json_array(g);
    doc["config"] = {{"order", args.order},
                     {"N", args.n_samples},
                     {"outlier_prob", args.outlier_prob},
                     {"noise_fraction", args.noise_fraction},
                     {"scenario", scenario_text(scenario)},
                     {"seed", args.seed},
                     {"sigma2", sigma2}};
    write_json_file(doc, args.truth);
  }
  return 0;
}

struct IdentifyArgs {
  std::string input;
  int order = 50;
  std::string noise = "student-auto";
  double nu = 0.0;
  bool nu_given = false;
  int groups = 0;
  int max_iter = 200;
  double tol = 1e-3;
  double sigma2 = 0.0;
  bool sigma2_given = false;
  std::string output;
};

int run_identify(const IdentifyArgs& args) {
  if (args.order < 1) throw rsid::ParameterError("--n must be >= 1");
  if (args.max_iter < 1) throw rsid::ParameterError("--max-iter must be >= 1");
  if (!(args.tol > 0.0)) throw rsid::ParameterError("--tol must be positive");

  const rsid::Dataset data = rsid::read_dataset_csv(args.input);
  rsid::validate_dataset(data);
  const int n_samples = static_cast<int>(data.size());

  double sigma2 = args.sigma2;
  if (args.sigma2_given) {
    if (!(sigma2 > 0.0)) {
      throw rsid::ParameterError("--sigma2 must be positive");
    }
  } else {
    sigma2 = rsid::estimate_noise_variance(
        data, rsid::default_fir_order(n_samples, args.order));
    if (!(sigma2 > 0.0)) {
      throw rsid::DataError(
          "estimated noise variance is zero (data fit exactly); pass "
          "--sigma2 explicitly");
    }
  }

  rsid::NoiseModel model;
  if (args.noise == "gaussian") {
    model = rsid::NoiseModel::gaussian(sigma2);
  } else if (args.noise == "laplace") {
    model = rsid::NoiseModel::laplacian(sigma2);
  } else if (args.noise == "student") {
    if (!args.nu_given) {
      throw rsid::ParameterError("--noise student requires --nu");
    }
    model = rsid::NoiseModel::student(sigma2, args.nu);
  } else if (args.noise == "student-auto") {
    model = rsid::NoiseModel::student_auto(sigma2);
  } else {
    throw rsid::ParameterError(
        "unknown noise model '" + args.noise +
        "' (expected gaussian, laplace, student, or student-auto)");
  }

  rsid::EMOptions options;
  options.max_iter = args.max_iter;
  options.rel_tol = args.tol;
  options.track_objective = true;
  if (args.groups > 0) {
    options.grouping = rsid::Grouping(n_samples, args.groups);
  }

  const rsid::Estimate est = rsid::run_em(data, args.order, model, options);

  json doc;
  doc["g"] = to_json_array(est.g_hat);
  doc["lower99"] = to_json_array(est.lower99);
  doc["upper99"] = to_json_array(est.upper99);
  doc["lambda"] = est.theta.lambda;
  doc["beta"] = est.theta.beta;
  doc["tau"] = to_json_array(options.grouping ? est.theta.upsilon
                                              : est.theta.tau);
  if (!est.nu.has_value()) {
    doc["nu"] = nullptr;
  } else if (std::isinf(*est.nu)) {
    doc["nu"] = "inf";
  } else {
    doc["nu"] = *est.nu;
  }
  doc["sigma2"] = sigma2;
  doc["iterations"] = est.trace.iterations;
  doc["converged"] = est.trace.converged;
  json trace = json::array();
  for (const auto& it : est.trace.iterates) trace.push_back(it.objective);
  doc["objective_trace"] = trace;

  if (args.output.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(doc, args.output);
  }
  return 0;
}

struct BenchArgs {
  int runs = 50;
  int n_samples = 200;
  int order = 50;
  int system_order = 30;
  double outlier_prob = 0.1;
  double noise_fraction = 0.1;
  std::string scenario = "mixture";
  std::string methods;
  std::uint64_t seed = 1;
  std::string report = "report.csv";
  std::string summary = "summary.json";
  int jobs = 0;
};

int run_bench(const BenchArgs& args) {
  rsid::BenchConfig cfg;
  cfg.runs = args.runs;
  cfg.n_samples = args.n_samples;
  cfg.kernel_order = args.order;
  cfg.system_order = args.system_order;
  cfg.outlier_prob = args.outlier_prob;
  cfg.noise_fraction = args.noise_fraction;
  cfg.scenario = parse_scenario(args.scenario);
  cfg.seed = args.seed;
  cfg.jobs = args.jobs > 0
                 ? args.jobs
                 : static_cast<int>(
                       std::max(1u, std::thread::hardware_concurrency()));

  std::string rest = args.methods;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string token = rest.substr(0, comma);
    if (!token.empty()) cfg.methods.push_back(rsid::MethodSpec::parse(token));
    if (comma == std::string::npos) break;
    rest.erase(0, comma + 1);
  }

  const rsid::FitReport report = rsid::run_monte_carlo(cfg);
  rsid::write_report_csv(report, args.report);
  rsid::write_summary_json(report, args.summary);

  for (const auto& rec : report.records) {
    if (!rec.error.empty()) {
      std::cerr << "warning: run " << rec.run << " " << rec.method
                << " failed: " << rec.error << '\n';
    }
  }
  for (const auto& s : report.summaries) {
    std::cout << s.method << ": mean fit " << s.mean << ", median "
              << s.median << ", ci95 +/- " << s.ci95_halfwidth << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outlier-robust impulse-response identification"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Generate a random system dataset and its ground truth");
  sim_cmd->add_option("--order", sim.order, "True system order");
  sim_cmd->add_option("--N", sim.n_samples, "Number of samples");
  sim_cmd->add_option("--outlier-prob", sim.outlier_prob,
                      "Contamination probability (mixture scenario)");
  sim_cmd->add_option("--noise-fraction", sim.noise_fraction,
                      "Noise variance as a fraction of the noiseless output "
                      "variance");
  sim_cmd->add_option("--scenario", sim.scenario,
                      "Noise scenario: mixture or student:<nu>");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");
  sim_cmd->add_option("-o,--output", sim.output, "Dataset CSV path")
      ->required();
  sim_cmd->add_option("--truth", sim.truth,
                      "Ground-truth JSON path (omit to skip)");

  IdentifyArgs idf;
  CLI::App* idf_cmd = app.add_subcommand(
      "identify", "Estimate an impulse response from a CSV dataset");
  idf_cmd->add_option("--input,-i", idf.input, "Dataset CSV path")
      ->required();
  idf_cmd->add_option("--n", idf.order, "Impulse response length");
  idf_cmd->add_option("--noise", idf.noise,
                      "Noise model: gaussian, laplace, student, student-auto");
  idf_cmd->add_option("--nu", idf.nu,
                      "Degrees of freedom (with --noise student)");
  idf_cmd->add_option("--groups", idf.groups,
                      "Share noise variances across this many sample blocks");
  idf_cmd->add_option("--max-iter", idf.max_iter, "Iteration cap");
  idf_cmd->add_option("--tol", idf.tol, "Relative theta-change tolerance");
  idf_cmd->add_option("--sigma2", idf.sigma2,
                      "Nominal noise variance (default: estimated from the "
                      "data by a long FIR fit)");
  idf_cmd->add_option("-o,--output", idf.output,
                      "Estimate JSON path (default: stdout)");

  BenchArgs ben;
  CLI::App* ben_cmd = app.add_subcommand(
      "bench", "Monte Carlo comparison of identification methods");
  ben_cmd->add_option("--runs", ben.runs, "Number of independent runs");
  ben_cmd->add_option("--N", ben.n_samples, "Samples per run");
  ben_cmd->add_option("--n", ben.order, "Impulse response length estimated");
  ben_cmd->add_option("--order", ben.system_order, "True system order");
  ben_cmd->add_option("--outlier-prob", ben.outlier_prob,
                      "Contamination probability (mixture scenario)");
  ben_cmd->add_option("--noise-fraction", ben.noise_fraction,
                      "Noise variance fraction of the noiseless output "
                      "variance");
  ben_cmd->add_option("--scenario", ben.scenario,
                      "Noise scenario: mixture or student:<nu>");
  ben_cmd
      ->add_option("--methods", ben.methods,
                   "Comma-separated: em-l, em-s, ss-ml, em-s-fixed:<nu>, "
                   "em-l-p:<p>, em-s-opt")
      ->required();
  ben_cmd->add_option("--seed", ben.seed, "Master RNG seed");
  ben_cmd->add_option("--report", ben.report, "Per-run report CSV path");
  ben_cmd->add_option("--summary", ben.summary, "Summary JSON path");
  ben_cmd->add_option("--jobs", ben.jobs,
                      "Worker threads (default: machine parallelism)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim);
    if (app.got_subcommand(idf_cmd)) {
      idf.nu_given = idf_cmd->count("--nu") > 0;
      idf.sigma2_given = idf_cmd->count("--sigma2") > 0;
      return run_identify(idf);
    }
    return run_bench(ben);
  } catch (const rsid::ConditioningError& e) {
    std::cerr << "numerical failure: " << e.what() << " (lambda=" << e.lambda
              << ", beta=" << e.beta << ", min tau=" << e.min_tau;
    if (e.iteration >= 0) std::cerr << ", iteration " << e.iteration;
    std::cerr << ")\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rsid::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
