#include "safecmaes/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "safecmaes/errors.hpp"

namespace safecmaes {

std::size_t weighted_nearest(const Vector& x, const std::vector<EvaluatedSolution>& history,
                             const AvoidanceConfig& config) {
  require(!history.empty(), ErrorCode::ContractViolation, "avoidance needs a non-empty history");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double w = history[i].safe ? config.w_safe : config.w_unsafe;
    const double dist = (x - history[i].x).norm() / w;
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::vector<Sample> avoidance_ask(const DistributionState& state, const StrategyParams& params,
                                  const std::vector<EvaluatedSolution>& history, const AvoidanceConfig& config,
                                  RngStream& rng) {
  require(config.w_safe > 0.0 && config.w_unsafe > 0.0 && config.oversample >= 1, ErrorCode::ContractViolation,
          "avoidance weights must be positive");
  require(!history.empty(), ErrorCode::ContractViolation, "avoidance needs a non-empty history");

  std::vector<Sample> accepted;
  const int candidates = config.oversample * params.lambda;
  for (int i = 0; i < candidates; ++i) {
    Sample s = decode(state, rng.std_normal(params.dim));
    if (history[weighted_nearest(s.x, history, config)].safe) accepted.push_back(std::move(s));
  }
  if (static_cast<int>(accepted.size()) < params.lambda) {
    fail(ErrorCode::AvoidanceExhausted, "only " + std::to_string(accepted.size()) + " of " +
                                            std::to_string(candidates) + " candidates have a safe nearest neighbour");
  }

  // Partial Fisher-Yates over indices, then restore draw order.
  std::vector<std::size_t> idx(accepted.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < static_cast<std::size_t>(params.lambda); ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(params.lambda));
  std::sort(idx.begin(), idx.end());

  std::vector<Sample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(std::move(accepted[i]));
  return out;
}

}  // namespace safecmaes
