#pragma once

#include <vector>

#include "safecmaes/cmaes.hpp"
#include "safecmaes/rng.hpp"
#include "safecmaes/safe_layer.hpp"

namespace safecmaes {

/// Weighted nearest-neighbour rejection: d(x_new, x_old) = |x_new - x_old| / w(x_old).
struct AvoidanceConfig {
  double w_safe = 1.0;
  double w_unsafe = 1.0;
  int oversample = 10;
};

/// Index into `history` of the point with the smallest weighted distance to x
/// (first on ties).
std::size_t weighted_nearest(const Vector& x, const std::vector<EvaluatedSolution>& history,
                             const AvoidanceConfig& config);

/// Draws oversample * lambda candidates, keeps those whose weighted nearest
/// evaluated neighbour is safe, and returns lambda of them picked uniformly at
/// random (in draw order). Throws AvoidanceExhausted when fewer than lambda qualify.
std::vector<Sample> avoidance_ask(const DistributionState& state, const StrategyParams& params,
                                  const std::vector<EvaluatedSolution>& history, const AvoidanceConfig& config,
                                  RngStream& rng);

}  // namespace safecmaes
