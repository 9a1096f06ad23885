#pragma once

#include <vector>

#include "safecmaes/mathkit.hpp"

namespace safecmaes {

/// exp(-|a - b|^2 / (2 H^2)).
double rbf_kernel(const Vector& a, const Vector& b, double length_scale);

/// Noiseless GP regression with an RBF kernel. Only the posterior mean and
/// its derivatives are provided.
class GprModel {
 public:
  static constexpr double kInitialJitter = 1e-10;
  static constexpr double kMaxJitter = 1e-6;

  /// Solves (K + jitter I) alpha = targets by Cholesky, escalating the jitter
  /// tenfold from 1e-10 up to 1e-6. Throws DegenerateGram when every attempt
  /// fails, ContractViolation on fewer than two points or non-finite inputs.
  static GprModel fit(const std::vector<Vector>& inputs, const Vector& targets, double length_scale);

  double mean(const Vector& z) const;

  /// sum_i alpha_i k(z_i, z) (z_i - z) / H^2
  Vector mean_gradient(const Vector& z) const;

  struct NormValue {
    double value = 0.0;
    Vector gradient;
    bool squared = false;
  };

  /// |grad mu(z)| together with its gradient in z. Below 1e-12 the squared
  /// norm is returned instead (flagged by `squared`), which is smooth there.
  NormValue gradient_norm(const Vector& z) const;

  Eigen::Index dim() const { return inputs_.rows(); }
  Eigen::Index size() const { return inputs_.cols(); }
  const Matrix& inputs() const { return inputs_; }
  const Vector& alpha() const { return alpha_; }
  double length_scale() const { return length_scale_; }
  double jitter() const { return jitter_; }

 private:
  Vector kernel_column(const Vector& z) const;

  Matrix inputs_;  // d x N
  Vector alpha_;
  double length_scale_ = 1.0;
  double jitter_ = 0.0;
};

}  // namespace safecmaes
