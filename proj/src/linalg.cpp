#include "leoipac/linalg.hpp"

#include <limits>

#include "leoipac/errors.hpp"

namespace leoipac {

void symmetrize(MatrixXd& a) {
  MatrixXd t = 0.5 * (a + a.transpose());
  a = std::move(t);
}

void hermitize(MatrixXcd& a) {
  MatrixXcd t = 0.5 * (a + a.adjoint());
  a = std::move(t);
}

double min_eigen_ratio(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const double tr = a.diagonal().cwiseAbs().sum();
  if (tr == 0.0) return 0.0;
  return es.eigenvalues().minCoeff() / tr;
}

double min_eigen_ratio(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = a.diagonal().real().cwiseAbs().sum();
  if (tr == 0.0) return 0.0;
  return es.eigenvalues().minCoeff() / tr;
}

bool is_psd(const MatrixXd& a, double tol) { return min_eigen_ratio(a) >= -tol; }
bool is_psd(const MatrixXcd& a, double tol) { return min_eigen_ratio(a) >= -tol; }

MatrixXd robust_cholesky(const MatrixXd& a, double rel_jitter, int max_escalations) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky of a non-square matrix");
  MatrixXd sym = 0.5 * (a + a.transpose());
  if (sym.isZero(0.0)) return MatrixXd::Zero(a.rows(), a.cols());
  Eigen::LLT<MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  VectorXd scale = sym.diagonal().cwiseAbs();
  const double fallback = scale.maxCoeff() > 0 ? scale.maxCoeff() : 1.0;
  for (Index i = 0; i < scale.size(); ++i) {
    if (scale(i) == 0.0) scale(i) = fallback;
  }
  double jitter = rel_jitter;
  for (int k = 0; k <= max_escalations; ++k) {
    MatrixXd trial = sym;
    trial.diagonal() += jitter * scale;
    llt.compute(trial);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter *= 10.0;
  }
  throw NonPsdCovariance("factorization failed after jitter escalation");
}

namespace {

template <typename Mat>
double scaled_condition_impl(const Mat& a) {
  const Index n = a.rows();
  if (n == 0) return 1.0;
  VectorXd d(n);
  for (Index i = 0; i < n; ++i) {
    const double v = std::real(a(i, i));
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    d(i) = 1.0 / std::sqrt(v);
  }
  Mat b = d.asDiagonal() * a * d.asDiagonal();
  b = (0.5 * (b + b.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(b, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

double scaled_condition(const MatrixXd& a) { return scaled_condition_impl(a); }
double scaled_condition(const MatrixXcd& a) { return scaled_condition_impl(a); }

MatrixXcd hermitian_sqrt_clipped(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a + a.adjoint()));
  const VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXd spd_inverse(const MatrixXd& a) {
  // Diagonal scaling first: entries of mixed units span many decades.
  const Index n = a.rows();
  VectorXd d(n);
  for (Index i = 0; i < n; ++i) {
    if (!(a(i, i) > 0.0)) throw NonPsdCovariance("non-positive diagonal in spd_inverse");
    d(i) = 1.0 / std::sqrt(a(i, i));
  }
  MatrixXd b = d.asDiagonal() * a * d.asDiagonal();
  Eigen::LDLT<MatrixXd> ldlt(0.5 * (b + b.transpose()));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NonPsdCovariance("LDLT failed");
  MatrixXd inv = d.asDiagonal() * ldlt.solve(MatrixXd::Identity(n, n)) * d.asDiagonal();
  symmetrize(inv);
  return inv;
}

}  // namespace leoipac
