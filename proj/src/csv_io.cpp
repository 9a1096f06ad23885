#include "safecmaes/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "safecmaes/errors.hpp"

namespace safecmaes {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    fail(ErrorCode::IoError, "not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

long parse_long(std::string_view text) {
  long v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    fail(ErrorCode::IoError, "not an integer: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

// Consumes the schema line and header; returns the header cells.
std::vector<std::string> read_preamble(std::istream& in, std::string_view schema) {
  std::string line;
  if (!std::getline(in, line) || line != "# " + std::string(schema))
    fail(ErrorCode::IoError, "expected schema line '# " + std::string(schema) + "'");
  if (!std::getline(in, line)) fail(ErrorCode::IoError, "missing header row");
  return split(line);
}

void append_quartiles(std::vector<std::string>& cells, const Quartiles& q) {
  cells.push_back(format_double(q.median));
  cells.push_back(format_double(q.q1));
  cells.push_back(format_double(q.q3));
}

Quartiles take_quartiles(const std::vector<std::string>& cells, std::size_t at) {
  return {parse_double(cells[at + 1]), parse_double(cells[at]), parse_double(cells[at + 2])};
}

}  // namespace

std::vector<std::string> trial_header(std::size_t n_constraints) {
  std::vector<std::string> h{"iter", "evals", "best_safe_f", "unsafe_count", "sigma", "eig_min", "eig_max"};
  for (std::size_t j = 1; j <= n_constraints; ++j) h.push_back("L_" + std::to_string(j));
  for (std::size_t j = 1; j <= n_constraints; ++j) h.push_back("rho_" + std::to_string(j));
  h.emplace_back("tau");
  h.emplace_back("best_f");
  return h;
}

std::vector<std::string> summary_header() {
  return {"evals",
          "n_trials",
          "best_safe_f_median",
          "best_safe_f_q1",
          "best_safe_f_q3",
          "unsafe_count_median",
          "unsafe_count_q1",
          "unsafe_count_q3",
          "best_f_median",
          "best_f_q1",
          "best_f_q3"};
}

void write_trial_csv(std::ostream& out, const TrialLog& log) {
  const auto p = static_cast<std::size_t>(log.thresholds.size());
  out << "# " << kTrialSchema << '\n';
  write_line(out, trial_header(p));
  for (const LogRow& r : log.rows) {
    std::vector<std::string> cells{std::to_string(r.iter),        std::to_string(r.evals),
                                   format_double(r.best_safe_f),  std::to_string(r.unsafe_count),
                                   format_double(r.sigma),        format_double(r.eig_min),
                                   format_double(r.eig_max)};
    for (Eigen::Index j = 0; j < r.lipschitz.size(); ++j) cells.push_back(format_double(r.lipschitz(j)));
    for (Eigen::Index j = 0; j < r.rho.size(); ++j) cells.push_back(format_double(r.rho(j)));
    cells.push_back(format_double(r.tau));
    cells.push_back(format_double(r.best_f));
    write_line(out, cells);
  }
}

void write_summary_csv(std::ostream& out, const ExperimentSummary& summary) {
  long n_trials = 0;
  for (const auto& t : summary.trials) n_trials += t.rows.empty() ? 0 : 1;
  out << "# " << kSummarySchema << '\n';
  write_line(out, summary_header());
  for (const SummaryRow& r : summary.rows) {
    std::vector<std::string> cells{std::to_string(r.evals), std::to_string(n_trials)};
    append_quartiles(cells, r.best_safe_f);
    append_quartiles(cells, r.unsafe_count);
    append_quartiles(cells, r.best_f);
    write_line(out, cells);
  }
}

std::vector<LogRow> read_trial_csv(std::istream& in) {
  const auto header = read_preamble(in, kTrialSchema);
  if (header.size() < 9 || (header.size() - 9) % 2 != 0) fail(ErrorCode::IoError, "malformed trial header");
  const std::size_t p = (header.size() - 9) / 2;
  if (header != trial_header(p)) fail(ErrorCode::IoError, "trial header does not match the schema");
  const auto np = static_cast<Eigen::Index>(p);

  std::vector<LogRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != header.size()) fail(ErrorCode::IoError, "row width does not match the header");
    LogRow r;
    r.iter = parse_long(c[0]);
    r.evals = parse_long(c[1]);
    r.best_safe_f = parse_double(c[2]);
    r.unsafe_count = parse_long(c[3]);
    r.sigma = parse_double(c[4]);
    r.eig_min = parse_double(c[5]);
    r.eig_max = parse_double(c[6]);
    r.lipschitz.resize(np);
    r.rho.resize(np);
    for (Eigen::Index j = 0; j < np; ++j) {
      r.lipschitz(j) = parse_double(c[7 + static_cast<std::size_t>(j)]);
      r.rho(j) = parse_double(c[7 + p + static_cast<std::size_t>(j)]);
    }
    r.tau = parse_double(c[7 + 2 * p]);
    r.best_f = parse_double(c[8 + 2 * p]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  const auto header = read_preamble(in, kSummarySchema);
  if (header != summary_header()) fail(ErrorCode::IoError, "summary header does not match the schema");
  std::vector<SummaryRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != header.size()) fail(ErrorCode::IoError, "row width does not match the header");
    SummaryRow r;
    r.evals = parse_long(c[0]);
    r.best_safe_f = take_quartiles(c, 2);
    r.unsafe_count = take_quartiles(c, 5);
    r.best_f = take_quartiles(c, 8);
    rows.push_back(r);
  }
  return rows;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"schema", kConfigSchema},
         {"problem", c.problem},
         {"dim", c.dim},
         {"safety", c.safety},
         {"algo", to_string(c.algorithm)},
         {"budget", c.budget},
         {"trials", c.trials},
         {"seed", c.seed},
         {"out", c.out},
         {"alpha", c.hyper.alpha},
         {"zeta_init", c.hyper.zeta_init},
         {"t_data", c.hyper.t_data},
         {"l_min", c.hyper.l_min},
         {"gamma", c.hyper.gamma},
         {"sigma0", c.sigma0},
         {"w_safe", c.avoidance.w_safe},
         {"w_unsafe", c.avoidance.w_unsafe},
         {"n_seed", c.n_seed},
         {"search_half_width", c.search_half_width},
         {"threads", c.threads}};
  j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "schema") {
        if (value.get<std::string>() != kConfigSchema)
          fail(ErrorCode::ConfigError, "unsupported config schema '" + value.get<std::string>() + "'");
      } else if (key == "problem") {
        c.problem = value.get<std::string>();
      } else if (key == "dim") {
        c.dim = value.get<int>();
      } else if (key == "safety") {
        c.safety = value.get<std::string>();
      } else if (key == "algo") {
        c.algorithm = parse_algorithm(value.get<std::string>());
      } else if (key == "budget") {
        c.budget = value.get<long>();
      } else if (key == "trials") {
        c.trials = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "out") {
        c.out = value.get<std::string>();
      } else if (key == "alpha") {
        c.hyper.alpha = value.get<double>();
      } else if (key == "zeta_init") {
        c.hyper.zeta_init = value.get<double>();
      } else if (key == "t_data") {
        c.hyper.t_data = value.get<int>();
      } else if (key == "l_min") {
        c.hyper.l_min = value.get<double>();
      } else if (key == "gamma") {
        c.hyper.gamma = value.get<double>();
      } else if (key == "sigma0") {
        c.sigma0 = value.get<double>();
      } else if (key == "w_safe") {
        c.avoidance.w_safe = value.get<double>();
      } else if (key == "w_unsafe") {
        c.avoidance.w_unsafe = value.get<double>();
      } else if (key == "n_seed") {
        c.n_seed = value.get<int>();
      } else if (key == "search_half_width") {
        c.search_half_width = value.get<double>();
      } else if (key == "threads") {
        c.threads = value.get<int>();
      } else if (key == "lambda") {
        c.lambda = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
      } else {
        fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, "bad value for '" + key + "': " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnknownName) fail(ErrorCode::ConfigError, e.what());
      throw;
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config file " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "config is not valid JSON: " + std::string(e.what()));
  }
}

std::string experiment_stem(const ExperimentConfig& c) {
  return std::string(to_string(c.algorithm)) + "_" + c.problem + "_" + c.safety + "_d" + std::to_string(c.dim);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::filesystem::path write_experiment(const std::filesystem::path& dir, const ExperimentSummary& summary,
                                       const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  json trials = json::array();
  for (const TrialLog& t : summary.trials) {
    const auto path = dir / (stem + "_trial" + std::to_string(t.trial) + ".csv");
    auto out = open_out(path);
    write_trial_csv(out, t);
    std::vector<double> h(t.thresholds.data(), t.thresholds.data() + t.thresholds.size());
    trials.push_back({{"trial", t.trial},
                      {"seed", t.seed},
                      {"thresholds", h},
                      {"termination", t.termination},
                      {"file", path.filename().string()}});
  }

  const auto summary_path = dir / (stem + "_summary.csv");
  {
    auto out = open_out(summary_path);
    write_summary_csv(out, summary);
  }

  json meta{{"schema", "safecmaes-run/1"},
            {"trial_schema", kTrialSchema},
            {"summary_schema", kSummarySchema},
            {"rng", RngStream::kVersionTag},
            {"config", config_to_json(summary.config)},
            {"summary", summary_path.filename().string()},
            {"trials", trials}};
  auto out = open_out(dir / (stem + ".json"));
  out << meta.dump(2) << '\n';
  return summary_path;
}

std::vector<std::filesystem::path> write_sweep(const std::filesystem::path& dir, const SweepResult& result) {
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < result.summaries.size(); ++i) {
    const auto& s = result.summaries[i];
    const std::string stem = experiment_stem(s.config) + "_" + result.param + "-" + format_double(result.values[i]);
    paths.push_back(write_experiment(dir, s, stem));
  }
  return paths;
}

}  // namespace safecmaes
