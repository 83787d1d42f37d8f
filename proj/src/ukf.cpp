#include "leoipac/ukf.hpp"

#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

double ukf_lambda(Index dim, const UkfParams& p) {
  const double L = static_cast<double>(dim);
  return p.alpha * p.alpha * (L + p.kappa) - L;
}

SigmaSet generate_sigma_points(const VectorXd& mean, const MatrixXd& cov, const UkfParams& p) {
  return generate_sigma_points(mean, cov, ukf_lambda(mean.size(), p), p.alpha, p.beta);
}

SigmaSet generate_sigma_points(const VectorXd& mean, const MatrixXd& cov, double lambda,
                               double alpha, double beta) {
  const Index L = mean.size();
  if (cov.rows() != L || cov.cols() != L) throw DimensionMismatch("sigma point covariance size");
  const double spread = static_cast<double>(L) + lambda;
  if (!(spread > 0.0)) throw NonPsdCovariance("L + lambda must be positive");
  const MatrixXd root = robust_cholesky(spread * cov);
  SigmaSet set;
  set.lambda = lambda;
  set.points.resize(L, 2 * L + 1);
  set.points.col(0) = mean;
  for (Index i = 0; i < L; ++i) {
    set.points.col(1 + i) = mean + root.col(i);
    set.points.col(1 + L + i) = mean - root.col(i);
  }
  set.wm = VectorXd::Constant(2 * L + 1, 0.5 / spread);
  set.wc = set.wm;
  set.wm(0) = lambda / spread;
  set.wc(0) = lambda / spread + (1.0 - alpha * alpha + beta);
  return set;
}

TransformedMoments unscented_moments(const SigmaSet& set, const MatrixXd& y) {
  const Index n = y.cols();
  const Index dim_x = set.points.rows();
  const VectorXd y0 = y.col(0);
  const VectorXd x0 = set.points.col(0);
  VectorXd dy_mean = VectorXd::Zero(y.rows());
  VectorXd dx_mean = VectorXd::Zero(dim_x);
  MatrixXd cov = MatrixXd::Zero(y.rows(), y.rows());
  MatrixXd cross = MatrixXd::Zero(dim_x, y.rows());
  for (Index i = 1; i < n; ++i) {
    const VectorXd dy = y.col(i) - y0;
    const VectorXd dx = set.points.col(i) - x0;
    dy_mean += set.wm(i) * dy;
    dx_mean += set.wm(i) * dx;
    cov.noalias() += set.wc(i) * dy * dy.transpose();
    cross.noalias() += set.wc(i) * dx * dy.transpose();
  }
  // sum wc (d_i - delta)(d_i - delta)^T expanded with sum_{i>0} wc_i d_i = delta.
  const double k = set.wc.sum() - 2.0;
  cov.noalias() += k * dy_mean * dy_mean.transpose();
  cross.noalias() += k * dx_mean * dy_mean.transpose();
  symmetrize(cov);
  return {y0 + dy_mean, cov, cross};
}

UkfState ukf_predict(const UkfState& state, const VectorMap& f, const MatrixXd& process_noise,
                     const UkfParams& p) {
  const SigmaSet set = generate_sigma_points(state.mean, state.cov, p);
  MatrixXd y(state.mean.size(), set.points.cols());
  for (Index i = 0; i < set.points.cols(); ++i) y.col(i) = f(set.points.col(i));
  const TransformedMoments m = unscented_moments(set, y);
  UkfState out{m.mean, m.cov + process_noise};
  symmetrize(out.cov);
  return out;
}

UkfState ukf_update(const UkfState& predicted, const VectorXd& observation, const VectorMap& h,
                    const NoiseModel& noise, const UkfParams& p, UpdateDiagnostics* diag) {
  const SigmaSet set = generate_sigma_points(predicted.mean, predicted.cov, p);
  const VectorXd z0 = h(set.points.col(0));
  MatrixXd z(z0.size(), set.points.cols());
  z.col(0) = z0;
  for (Index i = 1; i < set.points.cols(); ++i) z.col(i) = h(set.points.col(i));
  if (observation.size() != z0.size()) throw DimensionMismatch("observation length");
  const TransformedMoments m = unscented_moments(set, z);

  MatrixXd q = m.cov + noise(set);
  symmetrize(q);
  if (scaled_condition(q) > 1e12) throw SingularInnovation("innovation covariance is ill-conditioned");
  const MatrixXd q_inv = spd_inverse(q);
  const MatrixXd gain = m.cross * q_inv;

  UkfState out;
  out.mean = predicted.mean + gain * (observation - m.mean);
  out.cov = predicted.cov - gain * q * gain.transpose();
  symmetrize(out.cov);
  if (diag) *diag = {m.mean, q, gain};
  return out;
}

}  // namespace leoipac
