#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safecmaes/baselines.hpp"
#include "safecmaes/problems.hpp"
#include "safecmaes/safe_layer.hpp"

namespace safecmaes {

enum class Algorithm { SafeCmaes, Cmaes, Avoidance };

std::string_view to_string(Algorithm algo);
/// safe-cmaes, cmaes, avoidance. Throws UnknownName otherwise.
Algorithm parse_algorithm(std::string_view name);

struct ExperimentConfig {
  std::string problem = "sphere";
  int dim = 5;
  std::string safety = "objective-median";
  Algorithm algorithm = Algorithm::SafeCmaes;
  long budget = 1000;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;  // output directory; empty writes nothing
  SafeHyperParams hyper;
  double sigma0 = 2.0;
  std::optional<int> lambda;
  AvoidanceConfig avoidance;
  int n_seed = 10;
  double search_half_width = 5.0;  // X = [-5, 5]^d
  int threads = 0;                 // 0: hardware concurrency
  bool record_evaluations = false;

  int population() const;
  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// One row per iteration; row 0 describes the state before the first batch.
struct LogRow {
  long iter = 0;
  long evals = 0;
  double best_safe_f = 0.0;
  long unsafe_count = 0;
  double sigma = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  Vector lipschitz;
  Vector rho;
  double tau = 0.0;
  double best_f = 0.0;
};

struct TrialLog {
  int trial = 0;
  std::uint64_t seed = 0;
  Vector thresholds;
  std::string termination;
  std::vector<LogRow> rows;
  std::vector<EvaluatedSolution> evaluations;  // filled when record_evaluations is set
};

/// Builds the problem instance for a trial: threshold and seeds come from
/// their own streams derived from the master seed and trial index.
ProblemInstance make_instance(const ExperimentConfig& config, int trial_index);

/// Runs one seeded trial to budget, TargetReached, Collapsed or
/// AvoidanceExhausted. Trial-level failures end up in `termination`.
TrialLog run_trial(const ExperimentConfig& config, int trial_index);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quantiles of a non-empty sample.
Quartiles quartiles(std::vector<double> values);

struct SummaryRow {
  long evals = 0;
  Quartiles best_safe_f;
  Quartiles unsafe_count;
  Quartiles best_f;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<SummaryRow> rows;
  std::vector<TrialLog> trials;
};

/// Runs all trials (in parallel, merged by trial index) and aligns them on
/// the evaluation axis; a finished trial carries its last row forward.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Applies `value` to alpha, zeta_init or T_data. Throws ConfigError for other names.
ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view param, double value);

struct SweepResult {
  std::string param;
  std::vector<double> values;
  std::vector<ExperimentSummary> summaries;
};

/// One experiment per value with the same master seed, so every setting sees
/// the same problem instances.
SweepResult sweep(const ExperimentConfig& base, std::string_view param, const std::vector<double>& values);

inline const std::vector<double> kAlphaSweep{1, 5, 10, 20, 40, 80, 160};
inline const std::vector<double> kZetaInitSweep{1, 5, 10, 20, 40};
inline const std::vector<double> kTDataSweep{1, 3, 5, 7, 9};

}  // namespace safecmaes
