#include "safecmaes/safe_layer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safecmaes/box_qn.hpp"
#include "safecmaes/errors.hpp"

namespace safecmaes {

namespace {

constexpr double kLipschitzFloor = 1e-12;
constexpr double kFlatSpread = 1e-12;

}  // namespace

Vector thresholds_of(const std::vector<SafetyConstraint>& constraints) {
  Vector h(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t j = 0; j < constraints.size(); ++j) h(static_cast<Eigen::Index>(j)) = constraints[j].threshold;
  return h;
}

bool is_safe(const Vector& safety_values, const Vector& thresholds) {
  return (safety_values.array() <= thresholds.array()).all();
}

EvaluatedSolution evaluate_solution(const Vector& x, const std::function<double(const Vector&)>& objective,
                                    const std::vector<SafetyConstraint>& constraints) {
  EvaluatedSolution sol;
  sol.x = x;
  sol.f = objective(x);
  sol.s.resize(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t j = 0; j < constraints.size(); ++j) sol.s(static_cast<Eigen::Index>(j)) = constraints[j].fn(x);
  sol.safe = is_safe(sol.s, thresholds_of(constraints));
  return sol;
}

EvalWindow::EvalWindow(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, ErrorCode::ContractViolation, "window capacity must be positive");
}

void EvalWindow::push(const EvaluatedSolution& sol) {
  items_.push_back(sol);
  while (items_.size() > capacity_) items_.pop_front();
}

void EvalWindow::push(const std::vector<EvaluatedSolution>& batch) {
  for (const auto& sol : batch) push(sol);
}

Vector phi(const Vector& x, const DistributionState& state) {
  return state.inv_factor * (x - state.mean) / state.sigma;
}

double delta(const EvaluatedSolution& sol, const Vector& thresholds, const Vector& lipschitz) {
  require(sol.safe && is_safe(sol.s, thresholds), ErrorCode::ContractViolation, "delta is defined for safe solutions only");
  require(sol.s.size() == thresholds.size() && lipschitz.size() == thresholds.size(), ErrorCode::ContractViolation,
          "delta: constraint count mismatch");
  double radius = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < thresholds.size(); ++j) {
    radius = std::min(radius, (thresholds(j) - sol.s(j)) / std::max(lipschitz(j), kLipschitzFloor));
  }
  return std::max(0.0, radius);
}

namespace {

template <typename Container>
SafeRegion region_from(const Container& solutions, const DistributionState& state, const Vector& thresholds,
                       const Vector& lipschitz) {
  SafeRegion region;
  std::size_t index = 0;
  for (const auto& sol : solutions) {
    if (sol.safe) region.anchors.push_back({phi(sol.x, state), delta(sol, thresholds, lipschitz), index});
    ++index;
  }
  return region;
}

}  // namespace

SafeRegion build_safe_region(const std::deque<EvaluatedSolution>& solutions, const DistributionState& state,
                             const Vector& thresholds, const Vector& lipschitz) {
  return region_from(solutions, state, thresholds, lipschitz);
}

SafeRegion build_safe_region(const std::vector<EvaluatedSolution>& solutions, const DistributionState& state,
                             const Vector& thresholds, const Vector& lipschitz) {
  return region_from(solutions, state, thresholds, lipschitz);
}

Projection project(const Vector& z_raw, const SafeRegion& region) {
  if (region.anchors.empty()) fail(ErrorCode::EmptySafeRegion, "no safe anchors to project onto");

  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  double best_dist = 0.0;
  for (std::size_t k = 0; k < region.anchors.size(); ++k) {
    const double dist = (z_raw - region.anchors[k].z).norm();
    const double score = region.anchors[k].radius - dist;
    if (score > best_score) {
      best_score = score;
      best = k;
      best_dist = dist;
    }
  }

  const Anchor& near = region.anchors[best];
  Projection out;
  out.anchor = best;
  out.xi = best_dist == 0.0 ? 1.0 : std::min(1.0, near.radius / best_dist);
  out.z = out.xi == 1.0 ? z_raw : Vector(out.xi * z_raw + (1.0 - out.xi) * near.z);
  return out;
}

double update_tau(std::size_t n_data, int lambda, const SafeHyperParams& hp) {
  const auto full = static_cast<std::size_t>(lambda) * static_cast<std::size_t>(hp.t_data);
  if (n_data < full) return std::pow(hp.zeta_init, 1.0 / static_cast<double>(n_data));
  return 1.0;
}

double update_rho(double rho, double nu, int dim, double alpha) {
  if (nu > 0.0) return rho * std::pow(alpha, nu);
  return std::max(1.0, rho / std::pow(alpha, 1.0 / dim));
}

std::optional<double> estimate_raw_lipschitz(const std::vector<Vector>& inputs, const Vector& safety_values,
                                             int lambda, RngStream& rng, const SafeHyperParams& hp) {
  require(inputs.size() >= 2 && static_cast<Eigen::Index>(inputs.size()) == safety_values.size(),
          ErrorCode::ContractViolation, "Lipschitz estimation needs at least two matching data points");
  const Eigen::Index d = inputs.front().size();
  const double n = static_cast<double>(safety_values.size());

  const double mean = safety_values.mean();
  const double spread = std::sqrt((safety_values.array() - mean).square().sum() / n);
  if (!(spread > kFlatSpread * std::max(1.0, std::abs(mean)))) return std::nullopt;

  const Vector targets = (safety_values.array() - mean) / spread;
  std::optional<GprModel> model;
  try {
    model = GprModel::fit(inputs, targets, 8.0 * static_cast<double>(d));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateGram) throw;
    return std::nullopt;
  }

  const BoxBounds box = BoxBounds::cube(d, -hp.search_radius, hp.search_radius);
  const int first_stage = hp.first_stage_per_lambda * lambda;
  Vector start;
  double best = -1.0;
  for (int i = 0; i < first_stage; ++i) {
    const Vector z = box.project(rng.std_normal(d));
    const double value = model->mean_gradient(z).norm();
    if (value > best) {
      best = value;
      start = z;
    }
  }

  BoxQnOptions options;
  options.max_iters = hp.inner_iters;
  const MaximizeResult result = maximize(
      [&](const Vector& z) {
        GprModel::NormValue nv = model->gradient_norm(z);
        return ValueAndGradient{nv.value, std::move(nv.gradient)};
      },
      start, box, options);
  best = std::max(best, model->mean_gradient(result.x).norm());
  return spread * best;
}

namespace {

std::vector<Vector> standardized_inputs(const std::deque<EvaluatedSolution>& items, const DistributionState& state) {
  std::vector<Vector> z;
  z.reserve(items.size());
  for (const auto& sol : items) z.push_back(phi(sol.x, state));
  return z;
}

Vector constraint_column(const std::deque<EvaluatedSolution>& items, Eigen::Index j) {
  Vector v(static_cast<Eigen::Index>(items.size()));
  Eigen::Index i = 0;
  for (const auto& sol : items) v(i++) = sol.s(j);
  return v;
}

}  // namespace

LipschitzState estimate_lipschitz(const EvalWindow& window, const DistributionState& state_next,
                                  const LipschitzState& lip, const Vector& violation_ratio, const StrategyParams& params,
                                  const SafeHyperParams& hp, RngStream& rng) {
  require(window.size() >= 2, ErrorCode::ContractViolation, "Lipschitz estimation needs at least two solutions");
  const Eigen::Index p = lip.lipschitz.size();
  require(violation_ratio.size() == p, ErrorCode::ContractViolation, "one violation ratio per constraint expected");

  const std::vector<Vector> inputs = standardized_inputs(window.items(), state_next);

  LipschitzState next = lip;
  next.tau = update_tau(window.size(), params.lambda, hp);
  for (Eigen::Index j = 0; j < p; ++j) {
    const std::optional<double> raw =
        estimate_raw_lipschitz(inputs, constraint_column(window.items(), j), params.lambda, rng, hp);
    if (raw) next.raw(j) = *raw;
    next.rho(j) = update_rho(lip.rho(j), violation_ratio(j), params.dim, hp.alpha);
    next.lipschitz(j) = next.raw(j) * next.tau * next.rho(j);
  }
  return next;
}

LipschitzState init_lipschitz(const std::vector<EvaluatedSolution>& seeds, const DistributionState& state0,
                              const StrategyParams& params, const SafeHyperParams& hp, RngStream& rng) {
  if (seeds.empty()) fail(ErrorCode::MissingSeeds, "at least one safe seed is required");
  for (const auto& s : seeds) require(s.safe, ErrorCode::ContractViolation, "every seed must be safe");

  const Eigen::Index p = seeds.front().s.size();
  LipschitzState lip;
  lip.rho = Vector::Ones(p);
  lip.tau = std::pow(hp.zeta_init, 1.0 / static_cast<double>(seeds.size()));
  lip.raw = Vector::Constant(p, hp.l_min);
  lip.lipschitz = Vector::Constant(p, hp.l_min);
  if (seeds.size() == 1) return lip;

  std::vector<Vector> inputs;
  inputs.reserve(seeds.size());
  for (const auto& s : seeds) inputs.push_back(phi(s.x, state0));
  for (Eigen::Index j = 0; j < p; ++j) {
    Vector values(static_cast<Eigen::Index>(seeds.size()));
    for (std::size_t i = 0; i < seeds.size(); ++i) values(static_cast<Eigen::Index>(i)) = seeds[i].s(j);
    const std::optional<double> raw = estimate_raw_lipschitz(inputs, values, params.lambda, rng, hp);
    if (raw) lip.raw(j) = *raw;
    lip.lipschitz(j) = std::max(hp.l_min, raw.value_or(0.0) * lip.tau);
  }
  return lip;
}

std::size_t init_mean(const std::vector<EvaluatedSolution>& seeds) {
  if (seeds.empty()) fail(ErrorCode::MissingSeeds, "at least one safe seed is required");
  std::size_t best = 0;
  for (std::size_t i = 1; i < seeds.size(); ++i)
    if (seeds[i].f < seeds[best].f) best = i;
  return best;
}

double init_stepsize(double sigma0, const EvaluatedSolution& mean_seed, const Vector& thresholds,
                     const Vector& lipschitz, int dim, double gamma) {
  const double radius = delta(mean_seed, thresholds, lipschitz);
  return sigma0 * std::min(radius / std::sqrt(chi2_ppf(gamma, dim)), 1.0);
}

std::vector<SafeSample> ask_safe(const DistributionState& state, const StrategyParams& params,
                                 const LipschitzState& lip, const EvalWindow& window,
                                 const std::vector<EvaluatedSolution>& seeds, const Vector& thresholds,
                                 RngStream& rng) {
  SafeRegion region = build_safe_region(window.items(), state, thresholds, lip.lipschitz);
  if (region.anchors.empty()) region = build_safe_region(seeds, state, thresholds, lip.lipschitz);

  std::vector<SafeSample> out;
  out.reserve(static_cast<std::size_t>(params.lambda));
  for (const Vector& z : sample_raw(params, rng)) {
    const Projection proj = project(z, region);
    out.push_back({z, decode(state, proj.z), proj.xi, region.anchors[proj.anchor].source});
  }
  return out;
}

Vector violation_ratios(const std::vector<EvaluatedSolution>& batch, const Vector& thresholds) {
  require(!batch.empty(), ErrorCode::ContractViolation, "violation ratios need a non-empty batch");
  Vector nu = Vector::Zero(thresholds.size());
  for (const auto& sol : batch) nu += (sol.s.array() > thresholds.array()).cast<double>().matrix();
  return nu / static_cast<double>(batch.size());
}

SafeCmaes::SafeCmaes(const DistributionState& initial, const std::vector<EvaluatedSolution>& seeds, Vector thresholds,
                     StrategyParams params, SafeHyperParams hp, std::uint64_t seed)
    : params_(std::move(params)),
      hp_(hp),
      thresholds_(std::move(thresholds)),
      seeds_(seeds),
      rng_(seed),
      state_(initial),
      window_(static_cast<std::size_t>(params_.lambda) * static_cast<std::size_t>(hp.t_data)) {
  require(hp_.t_data >= 1 && hp_.alpha >= 1.0 && hp_.zeta_init >= 1.0 && hp_.l_min > 0.0 && hp_.gamma > 0.0 &&
              hp_.gamma < 1.0,
          ErrorCode::ContractViolation, "invalid safe CMA-ES hyperparameters");
  require(initial.dim() == params_.dim, ErrorCode::ContractViolation, "state and strategy dimensions differ");

  lip_ = init_lipschitz(seeds_, initial, params_, hp_, rng_);

  const EvaluatedSolution& best = seeds_[init_mean(seeds_)];
  state_.mean = best.x;
  state_.sigma = init_stepsize(initial.sigma, best, thresholds_, lip_.lipschitz, params_.dim, hp_.gamma);
  window_.push(seeds_);
}

std::vector<SafeSample> SafeCmaes::ask() {
  return ask_safe(state_, params_, lip_, window_, seeds_, thresholds_, rng_);
}

void SafeCmaes::tell(const std::vector<SafeSample>& samples, const std::vector<EvaluatedSolution>& evaluated) {
  require(samples.size() == evaluated.size(), ErrorCode::ContractViolation, "one evaluation per sample expected");
  std::vector<Member> members;
  members.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i].sample;
    members.push_back({s.z, s.y, s.x, evaluated[i].f});
  }
  state_ = safecmaes::tell(state_, params_, std::move(members));
  window_.push(evaluated);
  lip_ = estimate_lipschitz(window_, state_, lip_, violation_ratios(evaluated, thresholds_), params_, hp_, rng_);
}

}  // namespace safecmaes
