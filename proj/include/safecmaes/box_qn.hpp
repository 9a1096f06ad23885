#pragma once

#include <functional>

#include "safecmaes/mathkit.hpp"

namespace safecmaes {

struct BoxBounds {
  Vector lower;
  Vector upper;

  static BoxBounds cube(Eigen::Index dim, double lo, double hi);

  bool contains(const Vector& x) const;
  Vector project(const Vector& x) const;
};

struct ValueAndGradient {
  double value = 0.0;
  Vector gradient;
};

using SmoothObjective = std::function<ValueAndGradient(const Vector&)>;

struct BoxQnOptions {
  int max_iters = 200;
  int memory = 10;
  double projected_gradient_tol = 1e-8;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct MaximizeResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
};

/// Projected limited-memory BFGS ascent on a box.
///
/// Works on the negated objective: trial points are projected onto the box,
/// variables sitting on a bound with an outward gradient are frozen, and the
/// curvature memory is dropped whenever that frozen set changes. Backtracking
/// Armijo line search (c = 1e-4, halving). The returned point is always inside
/// the box and its value is never below the value at x0.
///
/// Throws InvalidStart when the objective at x0 is not finite, and
/// ContractViolation when x0 lies outside the bounds.
MaximizeResult maximize(const SmoothObjective& objective, const Vector& x0, const BoxBounds& bounds,
                        const BoxQnOptions& options = {});

}  // namespace safecmaes
