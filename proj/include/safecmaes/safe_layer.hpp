#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safecmaes/cmaes.hpp"
#include "safecmaes/gpr.hpp"
#include "safecmaes/rng.hpp"

namespace safecmaes {

/// Black-box safety function s_j with threshold h_j; safe iff s_j(x) <= h_j.
struct SafetyConstraint {
  std::function<double(const Vector&)> fn;
  double threshold = 0.0;
  std::string name;
};

struct EvaluatedSolution {
  Vector x;
  double f = 0.0;
  Vector s;  // one entry per constraint
  bool safe = true;
};

Vector thresholds_of(const std::vector<SafetyConstraint>& constraints);

EvaluatedSolution evaluate_solution(const Vector& x, const std::function<double(const Vector&)>& objective,
                                    const std::vector<SafetyConstraint>& constraints);

/// safe iff every s_j <= h_j.
bool is_safe(const Vector& safety_values, const Vector& thresholds);

struct SafeHyperParams {
  int t_data = 5;
  double zeta_init = 10.0;
  double alpha = 10.0;
  double l_min = 100.0;
  double gamma = 0.9;
  int first_stage_per_lambda = 5;  // first-stage candidates = 5 * lambda
  int inner_iters = 200;
  double search_radius = 3.0;      // maximization box [-3, 3]^d
};

/// The most recent lambda * T_data evaluated solutions, seeds first. Its size
/// follows N_data = min(N_seed + lambda t, lambda T_data).
class EvalWindow {
 public:
  explicit EvalWindow(std::size_t capacity);

  void push(const EvaluatedSolution& sol);
  void push(const std::vector<EvaluatedSolution>& batch);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return items_.size() >= capacity_; }
  const std::deque<EvaluatedSolution>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<EvaluatedSolution> items_;
};

struct LipschitzState {
  Vector lipschitz;  // L_j
  Vector rho;        // rho_j >= 1
  double tau = 1.0;
  Vector raw;        // last GPR estimate per constraint, carried forward on fallback
};

struct Anchor {
  Vector z;              // phi(x)
  double radius = 0.0;   // delta(x)
  std::size_t source = 0;
};

struct SafeRegion {
  std::vector<Anchor> anchors;
};

struct Projection {
  Vector z;
  double xi = 1.0;
  std::size_t anchor = 0;
};

/// (sqrt C)^-1 (x - m) / sigma, using the state's covariant factor.
Vector phi(const Vector& x, const DistributionState& state);

/// min_j (h_j - s_j) / max(L_j, 1e-12). Throws ContractViolation on an unsafe solution.
double delta(const EvaluatedSolution& sol, const Vector& thresholds, const Vector& lipschitz);

/// Anchors from the safe members of `solutions` under the current parameters.
SafeRegion build_safe_region(const std::deque<EvaluatedSolution>& solutions, const DistributionState& state,
                             const Vector& thresholds, const Vector& lipschitz);
SafeRegion build_safe_region(const std::vector<EvaluatedSolution>& solutions, const DistributionState& state,
                             const Vector& thresholds, const Vector& lipschitz);

/// Moves z toward the anchor maximizing radius - |z - anchor| until it lies in
/// that anchor's ball. Throws EmptySafeRegion for a region without anchors.
Projection project(const Vector& z_raw, const SafeRegion& region);

/// tau = zeta_init^(1/N_data) while N_data < lambda T_data, else 1.
double update_tau(std::size_t n_data, int lambda, const SafeHyperParams& hp);

/// rho * alpha^nu if nu > 0, else max(1, rho / alpha^(1/d)).
double update_rho(double rho, double nu, int dim, double alpha);

/// sigma_j * max_{z in [-3,3]^d} |grad mu(z | D)| for one constraint, with D
/// the standardized inputs and normalized safety values. Returns nullopt when
/// the values are (numerically) constant or the Gram matrix is degenerate.
std::optional<double> estimate_raw_lipschitz(const std::vector<Vector>& inputs, const Vector& safety_values,
                                             int lambda, RngStream& rng, const SafeHyperParams& hp);

/// Refits every constraint's surrogate on the window under the updated
/// parameters, then applies the tau and rho corrections. `violation_ratio`
/// holds nu_j for the batch just evaluated.
LipschitzState estimate_lipschitz(const EvalWindow& window, const DistributionState& state_next,
                                  const LipschitzState& lip, const Vector& violation_ratio, const StrategyParams& params,
                                  const SafeHyperParams& hp, RngStream& rng);

/// L_j^(0) = max(L_min, Lhat_j tau0) with tau0 = zeta_init^(1/N_seed); L_min
/// for every constraint when only one seed is given. Throws MissingSeeds on
/// an empty seed list and ContractViolation on an unsafe seed.
LipschitzState init_lipschitz(const std::vector<EvaluatedSolution>& seeds, const DistributionState& state0,
                              const StrategyParams& params, const SafeHyperParams& hp, RngStream& rng);

/// Index of the seed with the lowest f (first on ties).
std::size_t init_mean(const std::vector<EvaluatedSolution>& seeds);

/// sigma0 * min(delta(m0) / sqrt(chi2_ppf(gamma, d)), 1).
double init_stepsize(double sigma0, const EvaluatedSolution& mean_seed, const Vector& thresholds,
                     const Vector& lipschitz, int dim, double gamma);

struct SafeSample {
  Vector z_raw;
  Sample sample;  // projected z, y, x
  double xi = 1.0;
  std::size_t anchor = 0;
};

/// Draws lambda raw samples and projects each into the safe region built from
/// the window (or from the seeds when the window holds no safe solution).
std::vector<SafeSample> ask_safe(const DistributionState& state, const StrategyParams& params,
                                 const LipschitzState& lip, const EvalWindow& window,
                                 const std::vector<EvaluatedSolution>& seeds, const Vector& thresholds,
                                 RngStream& rng);

/// Fraction of the batch violating each constraint.
Vector violation_ratios(const std::vector<EvaluatedSolution>& batch, const Vector& thresholds);

/// Ask/tell driver for the whole safe loop.
class SafeCmaes {
 public:
  /// Initializes L^(0) under `initial`, moves the mean to the best seed and
  /// shrinks the step-size so the safe ball around it holds a gamma share of samples.
  SafeCmaes(const DistributionState& initial, const std::vector<EvaluatedSolution>& seeds, Vector thresholds,
            StrategyParams params, SafeHyperParams hp, std::uint64_t seed);

  std::vector<SafeSample> ask();

  /// `evaluated[i]` must be the evaluation of `samples[i].sample.x`.
  void tell(const std::vector<SafeSample>& samples, const std::vector<EvaluatedSolution>& evaluated);

  const DistributionState& state() const { return state_; }
  const LipschitzState& lipschitz() const { return lip_; }
  const EvalWindow& window() const { return window_; }
  const StrategyParams& params() const { return params_; }
  const SafeHyperParams& hyper() const { return hp_; }
  const Vector& thresholds() const { return thresholds_; }
  const std::vector<EvaluatedSolution>& seeds() const { return seeds_; }

 private:
  StrategyParams params_;
  SafeHyperParams hp_;
  Vector thresholds_;
  std::vector<EvaluatedSolution> seeds_;
  RngStream rng_;
  DistributionState state_;
  LipschitzState lip_;
  EvalWindow window_;
};

}  // namespace safecmaes
