#include "safecmaes/gpr.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "safecmaes/errors.hpp"

namespace safecmaes {

double rbf_kernel(const Vector& a, const Vector& b, double length_scale) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * length_scale * length_scale));
}

GprModel GprModel::fit(const std::vector<Vector>& inputs, const Vector& targets, double length_scale) {
  require(inputs.size() >= 2, ErrorCode::ContractViolation, "GPR fit needs at least two points");
  require(static_cast<Eigen::Index>(inputs.size()) == targets.size(), ErrorCode::ContractViolation,
          "GPR inputs and targets differ in length");
  require(length_scale > 0.0, ErrorCode::ContractViolation, "GPR length scale must be positive");
  require(targets.allFinite(), ErrorCode::ContractViolation, "GPR targets must be finite");

  const Eigen::Index d = inputs.front().size();
  const Eigen::Index n = targets.size();
  GprModel model;
  model.length_scale_ = length_scale;
  model.inputs_.resize(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector& z = inputs[static_cast<std::size_t>(i)];
    require(z.size() == d && z.allFinite(), ErrorCode::ContractViolation, "GPR inputs must be finite and equal-sized");
    model.inputs_.col(i) = z;
  }

  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      gram(i, j) = gram(j, i) = rbf_kernel(model.inputs_.col(i), model.inputs_.col(j), length_scale);
    }
  }

  for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    Matrix k = gram;
    k.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) continue;
    Vector alpha = llt.solve(targets);
    if (!alpha.allFinite()) continue;
    model.alpha_ = std::move(alpha);
    model.jitter_ = jitter;
    return model;
  }
  fail(ErrorCode::DegenerateGram, "Gram matrix not positive definite with jitter up to 1e-6");
}

Vector GprModel::kernel_column(const Vector& z) const {
  const double inv = 1.0 / (2.0 * length_scale_ * length_scale_);
  return (-(inputs_.colwise() - z).colwise().squaredNorm().transpose() * inv).array().exp().matrix();
}

double GprModel::mean(const Vector& z) const { return kernel_column(z).dot(alpha_); }

Vector GprModel::mean_gradient(const Vector& z) const {
  const Vector weights = kernel_column(z).cwiseProduct(alpha_);
  const double inv_h2 = 1.0 / (length_scale_ * length_scale_);
  // sum_i w_i (z_i - z); differencing first keeps large weights from cancelling
  const Matrix diffs = inputs_.colwise() - z;
  return diffs * weights * inv_h2;
}

GprModel::NormValue GprModel::gradient_norm(const Vector& z) const {
  const Vector weights = kernel_column(z).cwiseProduct(alpha_);
  const double inv_h2 = 1.0 / (length_scale_ * length_scale_);
  const Matrix diffs = inputs_.colwise() - z;  // r_i = z_i - z
  const Vector grad = diffs * weights * inv_h2;

  // Hessian-vector product: sum_i w_i (r_i r_i^T / H^4 - I / H^2) v
  auto hess_times = [&](const Vector& v) -> Vector {
    const Vector proj = diffs.transpose() * v;
    return diffs * weights.cwiseProduct(proj) * (inv_h2 * inv_h2) - v * (weights.sum() * inv_h2);
  };

  NormValue out;
  const double norm = grad.norm();
  if (norm < 1e-12) {
    out.value = norm * norm;
    out.gradient = 2.0 * hess_times(grad);
    out.squared = true;
  } else {
    out.value = norm;
    out.gradient = hess_times(grad) / norm;
  }
  return out;
}

}  // namespace safecmaes
