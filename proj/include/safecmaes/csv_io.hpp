#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "safecmaes/harness.hpp"

namespace safecmaes {

// First line of every CSV we write. Readers reject anything else.
inline constexpr std::string_view kTrialSchema = "safecmaes-trial/1";
inline constexpr std::string_view kSummarySchema = "safecmaes-summary/1";
inline constexpr std::string_view kConfigSchema = "safecmaes-config/1";

/// %.17g; nan and inf spelled as such.
std::string format_double(double v);
double parse_double(std::string_view text);

/// iter,evals,best_safe_f,unsafe_count,sigma,eig_min,eig_max,L_1..L_p,rho_1..rho_p,tau,best_f
std::vector<std::string> trial_header(std::size_t n_constraints);
std::vector<std::string> summary_header();

void write_trial_csv(std::ostream& out, const TrialLog& log);
void write_summary_csv(std::ostream& out, const ExperimentSummary& summary);

/// Inverse of the writers. Throws IoError on a schema or header mismatch.
std::vector<LogRow> read_trial_csv(std::istream& in);
std::vector<SummaryRow> read_summary_csv(std::istream& in);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Overlays the keys of `j` on `base`. Unknown keys and wrong types raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default file stem: <algo>_<problem>_<safety>_d<dim>.
std::string experiment_stem(const ExperimentConfig& config);

/// Writes <stem>_trial<k>.csv per trial, <stem>_summary.csv and <stem>.json
/// (config, thresholds, termination reasons). Returns the summary path.
std::filesystem::path write_experiment(const std::filesystem::path& dir, const ExperimentSummary& summary,
                                       const std::string& stem);

/// One write_experiment per value, stem <base stem>_<param>-<value>.
std::vector<std::filesystem::path> write_sweep(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace safecmaes
