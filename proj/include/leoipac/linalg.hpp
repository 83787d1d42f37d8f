#pragma once

#include "leoipac/types.hpp"

namespace leoipac {

void symmetrize(MatrixXd& a);
void hermitize(MatrixXcd& a);

/// Smallest eigenvalue divided by the trace (0 for a zero matrix).
double min_eigen_ratio(const MatrixXd& a);
double min_eigen_ratio(const MatrixXcd& a);

/// True when the smallest eigenvalue is at least -tol * trace.
bool is_psd(const MatrixXd& a, double tol = 1e-9);
bool is_psd(const MatrixXcd& a, double tol = 1e-9);

/// Lower Cholesky factor. On failure adds rel_jitter * diag(a), escalating
/// by x10 up to max_escalations times; throws NonPsdCovariance after that.
MatrixXd robust_cholesky(const MatrixXd& a, double rel_jitter = 1e-12,
                         int max_escalations = 3);

/// Condition number of D^{-1/2} A D^{-1/2}, D = diag(A). Insensitive to the
/// units of individual coordinates. Returns +inf for a singular matrix.
double scaled_condition(const MatrixXd& a);
double scaled_condition(const MatrixXcd& a);

/// Hermitian square root with negative eigenvalues clipped to zero.
MatrixXcd hermitian_sqrt_clipped(const MatrixXcd& a);

/// Inverse of a symmetric positive definite matrix via LDLT.
MatrixXd spd_inverse(const MatrixXd& a);

}  // namespace leoipac
