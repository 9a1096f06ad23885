#include "safecmaes/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "safecmaes/errors.hpp"

namespace safecmaes {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::SafeCmaes: return "safe-cmaes";
    case Algorithm::Cmaes: return "cmaes";
    case Algorithm::Avoidance: return "avoidance";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "safe-cmaes") return Algorithm::SafeCmaes;
  if (name == "cmaes") return Algorithm::Cmaes;
  if (name == "avoidance") return Algorithm::Avoidance;
  fail(ErrorCode::UnknownName, "unknown algorithm '" + std::string(name) + "'");
}

int ExperimentConfig::population() const {
  return lambda.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim)))));
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  check(std::find(benchmark_names().begin(), benchmark_names().end(), problem) != benchmark_names().end(),
        "unknown problem '" + problem + "'");
  check(std::find(safety_kind_names().begin(), safety_kind_names().end(), safety) != safety_kind_names().end(),
        "unknown safety kind '" + safety + "'");
  check(dim >= 2, "dim must be >= 2");
  check(!lambda || *lambda >= 2, "lambda must be >= 2");
  check(trials >= 1, "trials must be >= 1");
  check(budget >= population(), "budget must be at least lambda (" + std::to_string(population()) + ")");
  check(sigma0 > 0.0, "sigma0 must be positive");
  check(n_seed >= 1, "n_seed must be >= 1");
  check(hyper.t_data >= 1, "T_data must be >= 1");
  check(hyper.alpha >= 1.0, "alpha must be >= 1");
  check(hyper.zeta_init >= 1.0, "zeta_init must be >= 1");
  check(hyper.l_min > 0.0, "L_min must be positive");
  check(hyper.gamma > 0.0 && hyper.gamma < 1.0, "gamma must lie in (0, 1)");
  check(avoidance.w_safe > 0.0 && avoidance.w_unsafe > 0.0, "avoidance weights must be positive");
  check(search_half_width > 0.0, "search space half width must be positive");
  check(threads >= 0, "threads must be >= 0");
}

namespace {

enum Stream : std::uint64_t { kThresholdStream = 1, kSeedStream = 2, kOptimizerStream = 3 };

struct Tracker {
  long evals = 0;
  long unsafe = 0;
  double best_safe_f = std::numeric_limits<double>::infinity();
  double best_f = std::numeric_limits<double>::infinity();

  void seed(const EvaluatedSolution& s) {
    best_f = std::min(best_f, s.f);
    if (s.safe) best_safe_f = std::min(best_safe_f, s.f);
  }
  void add(const EvaluatedSolution& s) {
    ++evals;
    if (!s.safe) ++unsafe;
    seed(s);
  }
};

LogRow make_row(long iter, const Tracker& tr, const DistributionState& state, const LipschitzState* lip,
                Eigen::Index n_constraints) {
  LogRow row;
  row.iter = iter;
  row.evals = tr.evals;
  row.best_safe_f = tr.best_safe_f;
  row.best_f = tr.best_f;
  row.unsafe_count = tr.unsafe;
  row.sigma = state.sigma;
  std::tie(row.eig_min, row.eig_max) = scaled_eigen_range(state);
  if (lip) {
    row.lipschitz = lip->lipschitz;
    row.rho = lip->rho;
    row.tau = lip->tau;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.lipschitz = Vector::Constant(n_constraints, nan);
    row.rho = Vector::Constant(n_constraints, nan);
    row.tau = nan;
  }
  return row;
}

}  // namespace

ProblemInstance make_instance(const ExperimentConfig& config, int trial_index) {
  const auto index = static_cast<std::uint64_t>(trial_index);
  RngStream threshold_rng(RngStream::derive_seed(config.seed, index, kThresholdStream));
  RngStream seed_rng(RngStream::derive_seed(config.seed, index, kSeedStream));

  ProblemInstance inst;
  inst.benchmark = make_benchmark(config.problem, config.dim);
  inst.space = BoxBounds::cube(config.dim, -config.search_half_width, config.search_half_width);
  inst.constraints = make_safety(parse_safety_kind(config.safety), inst.benchmark, inst.space, threshold_rng);
  inst.seeds = sample_safe_seeds(inst.benchmark.f, inst.constraints, inst.space, seed_rng, config.n_seed);
  return inst;
}

TrialLog run_trial(const ExperimentConfig& config, int trial_index) {
  config.validate();
  TrialLog log;
  log.trial = trial_index;
  log.seed = RngStream::derive_seed(config.seed, static_cast<std::uint64_t>(trial_index), kOptimizerStream);

  ProblemInstance inst;
  try {
    inst = make_instance(config, trial_index);
  } catch (const Error& e) {
    log.termination = std::string(to_string(e.code()));
    return log;
  }
  log.thresholds = thresholds_of(inst.constraints);
  const auto p = static_cast<Eigen::Index>(inst.constraints.size());
  const StrategyParams params = default_params(config.dim, config.lambda);

  Tracker tracker;
  for (const auto& s : inst.seeds) tracker.seed(s);

  const Vector m0 = inst.seeds[init_mean(inst.seeds)].x;
  const DistributionState initial = DistributionState::initial(m0, config.sigma0);

  auto evaluate_batch = [&](const std::vector<Vector>& xs) {
    std::vector<EvaluatedSolution> batch;
    batch.reserve(xs.size());
    for (const auto& x : xs) {
      batch.push_back(evaluate_solution(x, inst.benchmark.f, inst.constraints));
      tracker.add(batch.back());
      if (config.record_evaluations) log.evaluations.push_back(batch.back());
    }
    return batch;
  };

  auto stop_reason = [&](const DistributionState& state) -> std::optional<std::string> {
    if (const auto r = should_terminate(state, tracker.best_f)) return std::string(to_string(*r));
    if (tracker.evals + params.lambda > config.budget) return std::string("BudgetExhausted");
    return std::nullopt;
  };

  try {
    if (config.algorithm == Algorithm::SafeCmaes) {
      SafeCmaes opt(initial, inst.seeds, log.thresholds, params, config.hyper, log.seed);
      log.rows.push_back(make_row(0, tracker, opt.state(), &opt.lipschitz(), p));
      for (long iter = 1;; ++iter) {
        if (auto r = stop_reason(opt.state())) {
          log.termination = *r;
          break;
        }
        const std::vector<SafeSample> samples = opt.ask();
        std::vector<Vector> xs;
        for (const auto& s : samples) xs.push_back(s.sample.x);
        const auto batch = evaluate_batch(xs);
        opt.tell(samples, batch);
        log.rows.push_back(make_row(iter, tracker, opt.state(), &opt.lipschitz(), p));
      }
    } else {
      RngStream rng(log.seed);
      DistributionState state = initial;
      std::vector<EvaluatedSolution> history = inst.seeds;
      log.rows.push_back(make_row(0, tracker, state, nullptr, p));
      for (long iter = 1;; ++iter) {
        if (auto r = stop_reason(state)) {
          log.termination = *r;
          break;
        }
        std::vector<Sample> samples;
        if (config.algorithm == Algorithm::Avoidance) {
          samples = avoidance_ask(state, params, history, config.avoidance, rng);
        } else {
          for (const Vector& z : sample_raw(params, rng)) samples.push_back(decode(state, z));
        }
        std::vector<Vector> xs;
        for (const auto& s : samples) xs.push_back(s.x);
        const auto batch = evaluate_batch(xs);
        std::vector<Member> members;
        for (std::size_t i = 0; i < samples.size(); ++i)
          members.push_back({samples[i].z, samples[i].y, samples[i].x, batch[i].f});
        state = tell(state, params, std::move(members));
        if (config.algorithm == Algorithm::Avoidance) history.insert(history.end(), batch.begin(), batch.end());
        log.rows.push_back(make_row(iter, tracker, state, nullptr, p));
      }
    }
  } catch (const Error& e) {
    log.termination = e.code() == ErrorCode::SingularCovariance ? std::string("Collapsed")
                                                                 : std::string(to_string(e.code()));
  }
  return log;
}

Quartiles quartiles(std::vector<double> values) {
  require(!values.empty(), ErrorCode::ContractViolation, "quartiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentSummary summary;
  summary.config = config;
  summary.trials.resize(static_cast<std::size_t>(config.trials));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(config.threads > 0 ? static_cast<unsigned>(config.threads) : hw,
                         static_cast<unsigned>(config.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < config.trials; i = next++) summary.trials[static_cast<std::size_t>(i)] = run_trial(config, i);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  long max_evals = 0;
  for (const auto& t : summary.trials)
    if (!t.rows.empty()) max_evals = std::max(max_evals, t.rows.back().evals);

  const long step = config.population();
  std::vector<std::size_t> cursor(summary.trials.size(), 0);
  for (long e = 0; e <= max_evals; e += step) {
    std::vector<double> best_safe, unsafe, best;
    for (std::size_t k = 0; k < summary.trials.size(); ++k) {
      const auto& rows = summary.trials[k].rows;
      if (rows.empty()) continue;
      while (cursor[k] + 1 < rows.size() && rows[cursor[k] + 1].evals <= e) ++cursor[k];
      const LogRow& r = rows[cursor[k]];
      best_safe.push_back(r.best_safe_f);
      unsafe.push_back(static_cast<double>(r.unsafe_count));
      best.push_back(r.best_f);
    }
    if (best_safe.empty()) break;
    summary.rows.push_back({e, quartiles(best_safe), quartiles(unsafe), quartiles(best)});
  }
  return summary;
}

ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view param, double value) {
  ExperimentConfig c = base;
  if (param == "alpha") {
    c.hyper.alpha = value;
  } else if (param == "zeta_init" || param == "zeta-init") {
    c.hyper.zeta_init = value;
  } else if (param == "T_data" || param == "t_data" || param == "t-data") {
    if (value != std::floor(value)) fail(ErrorCode::ConfigError, "T_data must be an integer");
    c.hyper.t_data = static_cast<int>(value);
  } else {
    fail(ErrorCode::ConfigError, "unknown sweep parameter '" + std::string(param) + "' (alpha, zeta_init, T_data)");
  }
  return c;
}

SweepResult sweep(const ExperimentConfig& base, std::string_view param, const std::vector<double>& values) {
  SweepResult result;
  result.param = std::string(param);
  result.values = values;
  for (double v : values) {
    const ExperimentConfig c = with_parameter(base, param, v);
    c.validate();
    result.summaries.push_back(run_experiment(c));
  }
  return result;
}

}  // namespace safecmaes
