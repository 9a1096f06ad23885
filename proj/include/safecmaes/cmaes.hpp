#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "safecmaes/mathkit.hpp"
#include "safecmaes/rng.hpp"

namespace safecmaes {

/// Fixed strategy constants for a given dimension and population size.
struct StrategyParams {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  Vector weights;  // positive, descending, sum to one
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double c_m = 1.0;
  double chi_d = 0.0;
};

/// Default constants; lambda = 4 + floor(3 ln d) unless overridden.
/// Throws ContractViolation for d < 2 or lambda < 2.
StrategyParams default_params(int dim, std::optional<int> lambda = std::nullopt);

/// Mean, covariance, step-size and evolution paths.
///
/// Alongside C the state carries a factor A with A A^T = C. A starts as the
/// symmetric root of C and is then updated as A sqrt(A^-1 C' A^-T), so a
/// linear change of coordinates x -> Rx maps A to RA. Samples are y = A z.
struct DistributionState {
  Vector mean;
  Matrix cov;
  double sigma = 1.0;
  Vector p_sigma;
  Vector p_c;
  long t = 0;
  Matrix factor;
  Matrix inv_factor;

  static DistributionState initial(const Vector& mean, double sigma, const Matrix& cov);
  static DistributionState initial(const Vector& mean, double sigma);
  /// Initial state with an explicit factor; C = A A^T.
  static DistributionState with_factor(const Vector& mean, double sigma, const Matrix& factor);

  Eigen::Index dim() const { return mean.size(); }
};

struct Sample {
  Vector z;
  Vector y;
  Vector x;
};

/// An evaluated population member. `z` is whatever standardized sample was
/// actually decoded and evaluated (raw, or projected by the safe layer).
struct Member {
  Vector z;
  Vector y;
  Vector x;
  double f = 0.0;
};

std::vector<Vector> sample_raw(const StrategyParams& params, RngStream& rng);

/// y = A z, x = m + sigma y.
Sample decode(const DistributionState& state, const Vector& z);

/// One parameter update from a full batch of lambda members (any order; ties
/// in f keep batch order). Throws InvalidObjective on non-finite f and
/// SingularCovariance if the updated C is not positive definite.
DistributionState tell(const DistributionState& state, const StrategyParams& params, std::vector<Member> population);

inline constexpr double kTargetValue = 1e-8;
inline constexpr double kCollapseEigenvalue = 1e-30;

enum class StopReason { TargetReached, Collapsed };

std::string_view to_string(StopReason reason);

/// TargetReached when best_f <= 1e-8; Collapsed when sigma^2 * lambda_min(C) < 1e-30.
std::optional<StopReason> should_terminate(const DistributionState& state, double best_f);

/// Extreme eigenvalues of sigma^2 C.
std::pair<double, double> scaled_eigen_range(const DistributionState& state);

}  // namespace safecmaes
