#include "safecmaes/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "safecmaes/errors.hpp"

namespace safecmaes {

StrategyParams default_params(int dim, std::optional<int> lambda) {
  require(dim >= 2, ErrorCode::ContractViolation, "default_params requires dimension >= 2");
  const double d = dim;

  StrategyParams p;
  p.dim = dim;
  p.lambda = lambda.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(d))));
  require(p.lambda >= 2, ErrorCode::ContractViolation, "population size must be >= 2");
  p.mu = p.lambda / 2;

  p.weights.resize(p.mu);
  for (int i = 0; i < p.mu; ++i) p.weights(i) = std::log((p.lambda + 1.0) / 2.0) - std::log(i + 1.0);
  p.weights /= p.weights.sum();
  p.mu_eff = 1.0 / p.weights.squaredNorm();

  p.c_sigma = (p.mu_eff + 2.0) / (d + p.mu_eff + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (d + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + p.mu_eff / d) / (d + 4.0 + 2.0 * p.mu_eff / d);
  p.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + p.mu_eff);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mu_eff - 2.0 + 1.0 / p.mu_eff) / ((d + 2.0) * (d + 2.0) + p.mu_eff));
  p.c_m = 1.0;
  p.chi_d = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  return p;
}

DistributionState DistributionState::initial(const Vector& mean, double sigma, const Matrix& cov) {
  require(sigma > 0.0, ErrorCode::ContractViolation, "initial step-size must be positive");
  require(cov.rows() == mean.size() && cov.cols() == mean.size(), ErrorCode::ContractViolation,
          "covariance shape does not match mean");
  const SpdRoots roots = spd_roots(cov);
  DistributionState s;
  s.mean = mean;
  s.cov = 0.5 * (cov + cov.transpose());
  s.sigma = sigma;
  s.p_sigma = Vector::Zero(mean.size());
  s.p_c = Vector::Zero(mean.size());
  s.factor = roots.sqrt;
  s.inv_factor = roots.inv_sqrt;
  return s;
}

DistributionState DistributionState::initial(const Vector& mean, double sigma) {
  return initial(mean, sigma, Matrix::Identity(mean.size(), mean.size()));
}

DistributionState DistributionState::with_factor(const Vector& mean, double sigma, const Matrix& factor) {
  require(sigma > 0.0, ErrorCode::ContractViolation, "initial step-size must be positive");
  require(factor.rows() == mean.size() && factor.cols() == mean.size(), ErrorCode::ContractViolation,
          "factor shape does not match mean");
  Eigen::FullPivLU<Matrix> lu(factor);
  require(lu.isInvertible(), ErrorCode::SingularCovariance, "factor is singular");
  DistributionState s;
  s.mean = mean;
  s.cov = factor * factor.transpose();
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  s.sigma = sigma;
  s.p_sigma = Vector::Zero(mean.size());
  s.p_c = Vector::Zero(mean.size());
  s.factor = factor;
  s.inv_factor = lu.inverse();
  return s;
}

std::vector<Vector> sample_raw(const StrategyParams& params, RngStream& rng) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(params.lambda));
  for (int i = 0; i < params.lambda; ++i) out.push_back(rng.std_normal(params.dim));
  return out;
}

Sample decode(const DistributionState& state, const Vector& z) {
  require(z.size() == state.dim() && z.allFinite(), ErrorCode::ContractViolation, "decode expects a finite z of matching dimension");
  Sample s;
  s.z = z;
  s.y = state.factor * z;
  s.x = state.mean + state.sigma * s.y;
  return s;
}

DistributionState tell(const DistributionState& state, const StrategyParams& params, std::vector<Member> population) {
  require(static_cast<int>(population.size()) == params.lambda, ErrorCode::ContractViolation,
          "tell requires exactly lambda members");
  for (const auto& m : population) {
    if (!std::isfinite(m.f)) fail(ErrorCode::InvalidObjective, "non-finite objective value in population");
  }
  std::stable_sort(population.begin(), population.end(), [](const Member& a, const Member& b) { return a.f < b.f; });

  const Eigen::Index d = state.dim();
  Vector delta_z = Vector::Zero(d);
  Vector delta_y = Vector::Zero(d);
  Matrix rank_mu = Matrix::Zero(d, d);
  for (int i = 0; i < params.mu; ++i) {
    const auto& m = population[static_cast<std::size_t>(i)];
    delta_z += params.weights(i) * m.z;
    delta_y += params.weights(i) * m.y;
    rank_mu += params.weights(i) * (m.y * m.y.transpose());
  }

  DistributionState next = state;
  const double cs = params.c_sigma;
  const double cc = params.c_c;
  next.p_sigma = (1.0 - cs) * state.p_sigma + std::sqrt(cs * (2.0 - cs) * params.mu_eff) * delta_z;

  const double generations = static_cast<double>(state.t + 1);
  const double bias = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * generations));
  const double h_sigma =
      next.p_sigma.norm() / bias < (1.4 + 2.0 / (static_cast<double>(d) + 1.0)) * params.chi_d ? 1.0 : 0.0;

  next.p_c = (1.0 - cc) * state.p_c + h_sigma * std::sqrt(cc * (2.0 - cc) * params.mu_eff) * delta_y;

  next.mean = state.mean + params.c_m * state.sigma * delta_y;
  next.sigma = state.sigma * std::exp(cs / params.d_sigma * (next.p_sigma.norm() / params.chi_d - 1.0));

  const double c1 = params.c_1;
  const double cmu = params.c_mu;
  const double weight_sum = params.weights.sum();
  next.cov = (1.0 + (1.0 - h_sigma) * c1 * cc * (2.0 - cc)) * state.cov +
             c1 * (next.p_c * next.p_c.transpose() - state.cov) + cmu * (rank_mu - weight_sum * state.cov);
  next.cov = 0.5 * (next.cov + next.cov.transpose()).eval();

  if (!next.cov.allFinite() || !std::isfinite(next.sigma)) {
    fail(ErrorCode::SingularCovariance, "non-finite distribution parameters after update");
  }

  Matrix whitened = state.inv_factor * next.cov * state.inv_factor.transpose();
  whitened = 0.5 * (whitened + whitened.transpose()).eval();
  const SpdRoots roots = spd_roots(whitened);
  next.factor = state.factor * roots.sqrt;
  next.inv_factor = roots.inv_sqrt * state.inv_factor;

  next.t = state.t + 1;
  return next;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::TargetReached: return "TargetReached";
    case StopReason::Collapsed: return "Collapsed";
  }
  return "Unknown";
}

std::pair<double, double> scaled_eigen_range(const DistributionState& state) {
  const EigenDecomposition eig = eig_sym(state.cov);
  const double s2 = state.sigma * state.sigma;
  return {s2 * eig.values(0), s2 * eig.values(eig.values.size() - 1)};
}

std::optional<StopReason> should_terminate(const DistributionState& state, double best_f) {
  if (best_f <= kTargetValue) return StopReason::TargetReached;
  if (scaled_eigen_range(state).first < kCollapseEigenvalue) return StopReason::Collapsed;
  return std::nullopt;
}

}  // namespace safecmaes
