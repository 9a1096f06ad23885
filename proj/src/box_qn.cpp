#include "safecmaes/box_qn.hpp"

#include <cmath>
#include <deque>

#include "safecmaes/errors.hpp"

namespace safecmaes {

BoxBounds BoxBounds::cube(Eigen::Index dim, double lo, double hi) {
  require(lo < hi, ErrorCode::ContractViolation, "box bounds need lower < upper");
  return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool BoxBounds::contains(const Vector& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Vector BoxBounds::project(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

using FrozenMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Components held at a bound because the descent direction points outward.
FrozenMask frozen_set(const Vector& x, const Vector& g, const BoxBounds& b) {
  FrozenMask m(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m(i) = (x(i) <= b.lower(i) && g(i) > 0.0) || (x(i) >= b.upper(i) && g(i) < 0.0);
  }
  return m;
}

Vector two_loop_direction(const Vector& g, const std::deque<CurvaturePair>& memory) {
  Vector q = g;
  std::vector<double> a(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    a[k] = memory[k].rho * memory[k].s.dot(q);
    q -= a[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double b = memory[k].rho * memory[k].y.dot(q);
    q += memory[k].s * (a[k] - b);
  }
  return -q;
}

}  // namespace

MaximizeResult maximize(const SmoothObjective& objective, const Vector& x0, const BoxBounds& bounds,
                        const BoxQnOptions& options) {
  require(bounds.lower.size() == bounds.upper.size() && (bounds.lower.array() < bounds.upper.array()).all(),
          ErrorCode::ContractViolation, "box bounds need lower < upper");
  require(bounds.contains(x0), ErrorCode::ContractViolation, "start point lies outside the box");

  // Minimize F = -objective.
  auto evaluate = [&](const Vector& x) {
    ValueAndGradient vg = objective(x);
    vg.value = -vg.value;
    vg.gradient = -vg.gradient;
    return vg;
  };

  Vector x = x0;
  ValueAndGradient cur = evaluate(x);
  if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) {
    fail(ErrorCode::InvalidStart, "objective is not finite at the start point");
  }

  std::deque<CurvaturePair> memory;
  FrozenMask previous_frozen = FrozenMask::Constant(x.size(), false);
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    const Vector pg = bounds.project(x - cur.gradient) - x;
    if (pg.lpNorm<Eigen::Infinity>() < options.projected_gradient_tol) break;

    const FrozenMask frozen = frozen_set(x, cur.gradient, bounds);
    if ((frozen != previous_frozen).any()) memory.clear();
    previous_frozen = frozen;

    Vector free_grad = cur.gradient;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (frozen(i)) free_grad(i) = 0.0;

    Vector direction = two_loop_direction(free_grad, memory);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (frozen(i)) direction(i) = 0.0;
    if (!direction.allFinite() || direction.dot(cur.gradient) >= 0.0) {
      memory.clear();
      direction = -free_grad;
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / free_grad.norm()) : 1.0;
    bool accepted = false;
    Vector x_next;
    ValueAndGradient next;
    for (int k = 0; k < options.max_backtracks; ++k, step *= 0.5) {
      x_next = bounds.project(x + step * direction);
      if ((x_next - x).lpNorm<Eigen::Infinity>() == 0.0) break;
      next = evaluate(x_next);
      const double decrease = std::min(0.0, cur.gradient.dot(x_next - x));
      if (std::isfinite(next.value) && next.gradient.allFinite() &&
          next.value <= cur.value + options.armijo * decrease) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (memory.empty()) break;
      memory.clear();
      continue;
    }

    const Vector s = x_next - x;
    const Vector y = next.gradient - cur.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    x = std::move(x_next);
    cur = std::move(next);
  }

  return {x, -cur.value, iter};
}

}  // namespace safecmaes
