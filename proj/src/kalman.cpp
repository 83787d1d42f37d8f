#include "leoipac/kalman.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

namespace {

constexpr double kMaxCondition = 1e12;

struct Whitened {
  MatrixXcd rinv_x;
  VectorXcd rinv_r;
};

// R^{-1} X and R^{-1} r using the block layout of the noise.
Whitened whiten(const NoiseStats& noise, const MatrixXcd& x, const VectorXcd& r) {
  Whitened w;
  w.rinv_x = MatrixXcd::Zero(x.rows(), x.cols());
  w.rinv_r = VectorXcd::Zero(r.size());
  std::vector<char> in_block(static_cast<std::size_t>(noise.rows()), 0);
  for (const auto& b : noise.blocks) {
    const Index n = static_cast<Index>(b.rows.size());
    if (scaled_condition(b.cov) > kMaxCondition)
      throw SingularInnovation("noise block condition exceeds 1e12");
    MatrixXcd xb(n, x.cols());
    VectorXcd rb(n);
    for (Index i = 0; i < n; ++i) {
      xb.row(i) = x.row(b.rows[static_cast<std::size_t>(i)]);
      rb(i) = r(b.rows[static_cast<std::size_t>(i)]);
      in_block[static_cast<std::size_t>(b.rows[static_cast<std::size_t>(i)])] = 1;
    }
    Eigen::LLT<MatrixXcd> llt(b.cov);
    if (llt.info() != Eigen::Success) throw SingularInnovation("noise block not positive definite");
    const MatrixXcd sx = llt.solve(xb);
    const VectorXcd sr = llt.solve(rb);
    for (Index i = 0; i < n; ++i) {
      w.rinv_x.row(b.rows[static_cast<std::size_t>(i)]) = sx.row(i);
      w.rinv_r(b.rows[static_cast<std::size_t>(i)]) = sr(i);
    }
  }
  for (Index i = 0; i < noise.rows(); ++i) {
    if (in_block[static_cast<std::size_t>(i)]) continue;
    const double v = noise.diag(i);
    if (!(v > 0.0)) throw SingularInnovation("zero noise variance on the information route");
    w.rinv_x.row(i) = x.row(i) / v;
    w.rinv_r(i) = r(i) / v;
  }
  return w;
}

KfState update_innovation(const KfState& pred, const MatrixXcd& x, const VectorXcd& resid,
                          const NoiseStats& noise) {
  MatrixXcd re = x * pred.cov * x.adjoint() + noise.dense();
  hermitize(re);
  if (scaled_condition(re) > kMaxCondition)
    throw SingularInnovation("innovation covariance condition exceeds 1e12");
  Eigen::LDLT<MatrixXcd> ldlt(re);
  // K = P X^H Re^{-1}
  const MatrixXcd px = pred.cov * x.adjoint();
  const MatrixXcd gain = ldlt.solve(px.adjoint()).adjoint();
  KfState out;
  out.mean = pred.mean + gain * resid;
  out.cov = pred.cov - gain * px.adjoint();
  hermitize(out.cov);
  return out;
}

KfState update_information(const KfState& pred, const MatrixXcd& x, const VectorXcd& resid,
                           const NoiseStats& noise) {
  const Whitened w = whiten(noise, x, resid);
  const MatrixXcd info = x.adjoint() * w.rinv_x;
  const VectorXcd b = x.adjoint() * w.rinv_r;
  const Index n = pred.mean.size();
  // (I + P W)^{-1} P is the posterior covariance.
  const MatrixXcd a = MatrixXcd::Identity(n, n) + pred.cov * info;
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  if (lu.rcond() < 1.0 / kMaxCondition)
    throw SingularInnovation("information update condition exceeds 1e12");
  KfState out;
  out.cov = lu.solve(pred.cov);
  hermitize(out.cov);
  out.mean = pred.mean + out.cov * b;
  return out;
}

}  // namespace

MatrixXcd NoiseStats::dense() const {
  const Index n = rows();
  MatrixXcd r = MatrixXcd::Zero(n, n);
  for (Index i = 0; i < n; ++i) r(i, i) = diag(i);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows.size(); ++i)
      for (std::size_t j = 0; j < b.rows.size(); ++j)
        r(b.rows[i], b.rows[j]) = b.cov(static_cast<Index>(i), static_cast<Index>(j));
  }
  return r;
}

NoiseStats NoiseStats::white(Index n, double var, NoiseFlavor flavor) {
  NoiseStats s;
  s.flavor = flavor;
  s.mean = VectorXcd::Zero(n);
  s.diag = VectorXd::Constant(n, var);
  return s;
}

NoiseStats stack_noise(const std::vector<NoiseStats>& parts) {
  NoiseStats out;
  Index n = 0;
  for (const auto& p : parts) n += p.rows();
  out.mean.resize(n);
  out.diag.resize(n);
  Index off = 0;
  for (const auto& p : parts) {
    out.flavor = p.flavor;
    out.mean.segment(off, p.rows()) = p.mean;
    out.diag.segment(off, p.rows()) = p.diag;
    for (const auto& b : p.blocks) {
      DenseNoiseBlock nb{b.rows, b.cov};
      for (auto& r : nb.rows) r += off;
      out.blocks.push_back(std::move(nb));
    }
    off += p.rows();
  }
  return out;
}

KfState kf_time_update(const KfState& filtered, const VectorXd& f, const VectorXd& g) {
  KfState next;
  next.mean = f.cast<cd>().cwiseProduct(filtered.mean);
  next.cov = f.cast<cd>().asDiagonal() * filtered.cov * f.cast<cd>().asDiagonal();
  next.cov.diagonal() += g.cwiseAbs2().cast<cd>();
  hermitize(next.cov);
  return next;
}

KfStepResult kf_step(const KfState& predicted, const MatrixXcd& x, const VectorXcd& y,
                     const NoiseStats& noise, const VectorXd& f, const VectorXd& g,
                     KfRoute route) {
  const Index n = predicted.mean.size();
  if (predicted.cov.rows() != n || predicted.cov.cols() != n || x.cols() != n ||
      x.rows() != y.size() || noise.rows() != y.size() || f.size() != n || g.size() != n)
    throw DimensionMismatch("kf_step operand sizes disagree");
  if (route == KfRoute::Auto) route = x.rows() > n ? KfRoute::Information : KfRoute::Innovation;

  KfStepResult out;
  out.route = route;
  if (x.rows() == 0) {
    out.filtered = predicted;
  } else {
    const VectorXcd resid = y - noise.mean - x * predicted.mean;
    out.filtered = route == KfRoute::Information ? update_information(predicted, x, resid, noise)
                                                 : update_innovation(predicted, x, resid, noise);
  }
  out.predicted = kf_time_update(out.filtered, f, g);
  return out;
}

KfStepResult kf_step(const KfState& predicted, const MatrixXcd& x, const VectorXcd& y,
                     const NoiseStats& noise, const ArMatrices& ar, KfRoute route) {
  return kf_step(predicted, x, y, noise, ar.f, ar.g, route);
}

}  // namespace leoipac
