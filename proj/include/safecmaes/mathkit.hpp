#pragma once

#include <Eigen/Core>

namespace safecmaes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigenvalues in ascending order; eigenvectors stored as matching columns.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

/// Symmetric square root and its inverse, obtained from one decomposition.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;
  double eig_min = 0.0;
  double eig_max = 0.0;
};

/// True when |A - A^T| is within `rel_tol` of max|A| elementwise.
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-12 * |A|_F.
/// Throws ContractViolation when the input is not square and symmetric.
EigenDecomposition eig_sym(const Matrix& a);

/// Unique SPD square root. Throws SingularCovariance on a non-positive eigenvalue.
Matrix sqrt_spd(const Matrix& a);

SpdRoots spd_roots(const Matrix& a);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(double x, int dof);

/// Inverse of chi2_cdf: bracketed bisection followed by a Newton polish.
/// Throws DomainError for p outside (0, 1) or dof < 1.
double chi2_ppf(double p, int dof);

}  // namespace safecmaes
