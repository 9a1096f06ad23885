// Command-line front end: run, sweep, list-problems.

#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "safecmaes/csv_io.hpp"
#include "safecmaes/errors.hpp"
#include "safecmaes/harness.hpp"

namespace {

using namespace safecmaes;

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 1;

// Raw flag values. Only flags the user actually passed are applied, on top of
// the config file (if any) and then the built-in defaults.
struct Flags {
  std::string config;
  std::string problem, safety, algo, out;
  int dim = 0, trials = 0, t_data = 0, threads = 0, lambda = 0, n_seed = 0;
  long budget = 0;
  std::uint64_t seed = 0;
  double alpha = 0, zeta_init = 0, l_min = 0, gamma = 0, sigma0 = 0, w_safe = 0, w_unsafe = 0;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> appliers;
};

template <class T>
void add(CLI::App* app, Flags& f, const std::string& name, T& slot, const std::string& help,
         std::function<void(ExperimentConfig&, const T&)> apply) {
  CLI::Option* opt = app->add_option(name, slot, help);
  f.appliers.emplace_back(opt, [&slot, apply](ExperimentConfig& c) { apply(c, slot); });
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  add<std::string>(app, f, "--problem", f.problem, "sphere | ellipsoid | reversed-ellipsoid | rosenbrock",
                   [](auto& c, auto& v) { c.problem = v; });
  add<int>(app, f, "--dim", f.dim, "search dimension", [](auto& c, auto& v) { c.dim = v; });
  add<std::string>(app, f, "--safety", f.safety, "objective-median | first-coordinate",
                   [](auto& c, auto& v) { c.safety = v; });
  add<std::string>(app, f, "--algo", f.algo, "safe-cmaes | cmaes | avoidance",
                   [](auto& c, auto& v) { c.algorithm = parse_algorithm(v); });
  add<long>(app, f, "--budget", f.budget, "evaluations per trial", [](auto& c, auto& v) { c.budget = v; });
  add<int>(app, f, "--trials", f.trials, "number of trials", [](auto& c, auto& v) { c.trials = v; });
  add<std::uint64_t>(app, f, "--seed", f.seed, "master seed", [](auto& c, auto& v) { c.seed = v; });
  add<std::string>(app, f, "--out", f.out, "output directory", [](auto& c, auto& v) { c.out = v; });
  add<double>(app, f, "--alpha", f.alpha, "Lipschitz growth factor", [](auto& c, auto& v) { c.hyper.alpha = v; });
  add<double>(app, f, "--zeta-init", f.zeta_init, "initial inflation", [](auto& c, auto& v) { c.hyper.zeta_init = v; });
  add<int>(app, f, "--t-data", f.t_data, "window length in generations", [](auto& c, auto& v) { c.hyper.t_data = v; });
  add<double>(app, f, "--l-min", f.l_min, "lower bound on the initial Lipschitz constant",
              [](auto& c, auto& v) { c.hyper.l_min = v; });
  add<double>(app, f, "--gamma", f.gamma, "initial step-size quantile", [](auto& c, auto& v) { c.hyper.gamma = v; });
  add<double>(app, f, "--sigma0", f.sigma0, "initial step-size", [](auto& c, auto& v) { c.sigma0 = v; });
  add<double>(app, f, "--w-safe", f.w_safe, "avoidance weight of safe points",
              [](auto& c, auto& v) { c.avoidance.w_safe = v; });
  add<double>(app, f, "--w-unsafe", f.w_unsafe, "avoidance weight of unsafe points",
              [](auto& c, auto& v) { c.avoidance.w_unsafe = v; });
  add<int>(app, f, "--lambda", f.lambda, "population size override", [](auto& c, auto& v) { c.lambda = v; });
  add<int>(app, f, "--n-seed", f.n_seed, "number of initial safe seeds", [](auto& c, auto& v) { c.n_seed = v; });
  add<int>(app, f, "--threads", f.threads, "worker threads (0 = all cores)", [](auto& c, auto& v) { c.threads = v; });
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  for (const auto& [opt, apply] : f.appliers)
    if (opt->count() > 0) apply(c);
  c.validate();
  return c;
}

void print_summary(const ExperimentSummary& s) {
  if (s.rows.empty()) return;
  const SummaryRow& last = s.rows.back();
  std::cout << experiment_stem(s.config) << ": evals=" << last.evals
            << " median best_safe_f=" << format_double(last.best_safe_f.median)
            << " median unsafe_count=" << format_double(last.unsafe_count.median) << '\n';
  for (const auto& t : s.trials) std::cout << "  trial " << t.trial << ": " << t.termination << '\n';
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(parse_double(item));
    } catch (const Error&) {
      fail(ErrorCode::ConfigError, "bad --values entry '" + item + "'");
    }
  }
  if (values.empty()) fail(ErrorCode::ConfigError, "--values is empty");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe CMA-ES experiment harness"};
  app.require_subcommand(1);

  Flags run_flags;
  CLI::App* run = app.add_subcommand("run", "run trials for one configuration");
  add_common(run, run_flags);

  Flags sweep_flags;
  std::string param, values_text;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one experiment per hyperparameter value");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", param, "alpha | zeta_init | T_data")->required();
  sweep_cmd->add_option("--values", values_text, "comma-separated values; default: the standard list");

  CLI::App* list = app.add_subcommand("list-problems", "print benchmark and safety names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*list) {
      for (const auto& name : benchmark_names()) std::cout << name << '\n';
      std::cout << "safety:";
      for (const auto& name : safety_kind_names()) std::cout << ' ' << name;
      std::cout << '\n';
      return 0;
    }

    if (*run) {
      const ExperimentConfig config = resolve(run_flags);
      const ExperimentSummary summary = run_experiment(config);
      print_summary(summary);
      if (!config.out.empty())
        std::cout << "wrote " << write_experiment(config.out, summary, experiment_stem(config)).string() << '\n';
      return 0;
    }

    const ExperimentConfig base = resolve(sweep_flags);
    std::vector<double> values;
    if (!values_text.empty()) {
      values = parse_values(values_text);
    } else if (param == "alpha") {
      values = kAlphaSweep;
    } else if (param == "zeta_init" || param == "zeta-init") {
      values = kZetaInitSweep;
    } else {
      values = kTDataSweep;
    }
    for (double v : values) with_parameter(base, param, v).validate();
    const SweepResult result = sweep(base, param, values);
    for (const auto& s : result.summaries) print_summary(s);
    if (!base.out.empty())
      for (const auto& p : write_sweep(base.out, result)) std::cout << "wrote " << p.string() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool config_error = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::UnknownName;
    return config_error ? kConfigExit : kRuntimeExit;
  }
}
