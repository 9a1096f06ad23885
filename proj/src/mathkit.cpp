#include "safecmaes/mathkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "safecmaes/errors.hpp"

namespace safecmaes {

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

EigenDecomposition eig_sym(const Matrix& input) {
  require(input.rows() == input.cols() && input.rows() > 0, ErrorCode::ContractViolation,
          "eig_sym expects a non-empty square matrix");
  require(input.allFinite(), ErrorCode::ContractViolation, "eig_sym input has non-finite entries");
  require(is_symmetric(input), ErrorCode::ContractViolation, "eig_sym input is not symmetric");

  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double norm_f = a.norm();
  const double tol = 1e-12 * norm_f;
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && norm_f > 0.0 && off_norm() >= tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

SpdRoots spd_roots(const Matrix& a) {
  const EigenDecomposition eig = eig_sym(a);
  if (!(eig.values(0) > 0.0)) {
    fail(ErrorCode::SingularCovariance, "matrix has a non-positive eigenvalue " + std::to_string(eig.values(0)));
  }
  const Vector root = eig.values.cwiseSqrt();
  SpdRoots out;
  out.sqrt = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  out.inv_sqrt = eig.vectors * root.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  out.sqrt = 0.5 * (out.sqrt + out.sqrt.transpose()).eval();
  out.inv_sqrt = 0.5 * (out.inv_sqrt + out.inv_sqrt.transpose()).eval();
  out.eig_min = eig.values(0);
  out.eig_max = eig.values(eig.values.size() - 1);
  return out;
}

Matrix sqrt_spd(const Matrix& a) { return spd_roots(a).sqrt; }

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_log_pdf(double x, int dof) {
  const double k = 0.5 * dof;
  return (k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  require(a > 0.0, ErrorCode::DomainError, "regularized_gamma_p requires a > 0");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi2_cdf(double x, int dof) {
  require(dof >= 1, ErrorCode::DomainError, "chi2_cdf requires dof >= 1");
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_ppf(double p, int dof) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::DomainError, "chi2_ppf requires 0 < p < 1");
  require(dof >= 1, ErrorCode::DomainError, "chi2_ppf requires dof >= 1");

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_cdf(hi, dof) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double residual = chi2_cdf(x, dof) - p;
    const double step = residual / std::exp(chi2_log_pdf(x, dof));
    const double next = x - step;
    if (!std::isfinite(next) || next <= 0.0) break;
    if (std::abs(chi2_cdf(next, dof) - p) > std::abs(residual)) break;
    x = next;
  }
  return x;
}

}  // namespace safecmaes
