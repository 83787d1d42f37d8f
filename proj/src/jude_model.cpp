#include "leoipac/jude_model.hpp"

#include <limits>

#include "leoipac/errors.hpp"
#include "leoipac/kernels/kernels.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

namespace {

// Sum over taps of the second moment of satellite s.
double tap_power(const TapPrior& prior, int s, int p) {
  double acc = 0.0;
  for (int i = 0; i < p; ++i) {
    const Index j = static_cast<Index>(s) * p + i;
    acc += prior.cov(j, j).real() + std::norm(prior.mean(j));
  }
  return acc;
}

}  // namespace

SoftSymbols SoftSymbols::hard(const VectorXcd& symbols) {
  SoftSymbols s;
  s.mean = symbols;
  s.second = symbols.cwiseAbs2();
  return s;
}

VectorXd SoftSymbols::variance() const {
  return (second - mean.cwiseAbs2()).cwiseMax(0.0);
}

Index MeasurementMatrix::rows() const {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  return n;
}

Index MeasurementMatrix::cols() const {
  Index n = 0;
  for (const auto& b : blocks) n += b.cols();
  return n;
}

MatrixXcd MeasurementMatrix::dense() const {
  MatrixXcd x = MatrixXcd::Zero(rows(), cols());
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    x.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return x;
}

VectorXcd mrc_effective_channel(const std::vector<VectorXcd>& h, const std::vector<VectorXcd>& w) {
  if (h.size() != w.size()) throw DimensionMismatch("mrc: satellite counts differ");
  VectorXcd out(static_cast<Index>(h.size()));
  for (std::size_t s = 0; s < h.size(); ++s) {
    if (h[s].size() != w[s].size()) throw DimensionMismatch("mrc: antenna counts differ");
    out(static_cast<Index>(s)) = kernels::cdot(w[s].data(), h[s].data(), static_cast<std::size_t>(h[s].size()));
  }
  return out;
}

NoiseStats detection_noise_cov(const std::vector<InterfererStats>& interferers,
                               const VectorXd& noise_var, int num_paths) {
  NoiseStats r = NoiseStats::white(noise_var.size(), 0.0, NoiseFlavor::Detection);
  r.diag = noise_var;
  for (const auto& it : interferers) {
    for (Index s = 0; s < noise_var.size(); ++s)
      r.diag(s) += std::norm(it.gains(s)) * tap_power(it.prior, static_cast<int>(s), num_paths);
  }
  return r;
}

MeasurementMatrix build_measurement_matrix(const VectorXcd& symbols, const VectorXcd& gains,
                                           int num_paths) {
  const int k = static_cast<int>(symbols.size());
  if (k == 0 || num_paths > k) throw DimensionMismatch("measurement matrix needs P <= K");
  const MatrixXcd q = dft_columns(k, num_paths);
  MeasurementMatrix x;
  for (Index s = 0; s < gains.size(); ++s) x.blocks.push_back(gains(s) * symbols.asDiagonal() * q);
  return x;
}

NoiseStats satellite_noise_stats(const std::vector<InterfererStats>& interferers, int s,
                                 double noise_var, const std::vector<Index>& tones,
                                 const std::vector<bool>& pilot_mask, int num_paths,
                                 bool augmented) {
  const int k = static_cast<int>(pilot_mask.size());
  const int p = num_paths;
  const Index n = static_cast<Index>(tones.size());
  const Index total = n + (augmented ? p : 0);
  NoiseStats out = NoiseStats::white(total, noise_var,
                                     augmented ? NoiseFlavor::EstimationAugmented
                                               : NoiseFlavor::EstimationDeterministic);
  const MatrixXcd q = dft_columns(k, p);

  std::vector<Index> known;
  for (Index i = 0; i < n; ++i)
    if (pilot_mask[static_cast<std::size_t>(tones[static_cast<std::size_t>(i)])]) known.push_back(i);

  DenseNoiseBlock block;
  block.rows = known;
  const Index nk = static_cast<Index>(known.size());
  block.cov = MatrixXcd::Identity(nk, nk) * noise_var;

  for (const auto& it : interferers) {
    const cd c = it.gains(s);
    const VectorXcd c0 = it.prior.mean.segment(static_cast<Index>(s) * p, p);
    const MatrixXcd p0 = it.prior.cov.block(static_cast<Index>(s) * p, static_cast<Index>(s) * p, p, p);
    const MatrixXcd second = p0 + c0 * c0.adjoint();
    // deterministic rows
    if (nk > 0) {
      MatrixXcd xk(nk, p);
      for (Index i = 0; i < nk; ++i) {
        const Index tone = tones[static_cast<std::size_t>(known[static_cast<std::size_t>(i)])];
        xk.row(i) = c * it.pilots(tone) * q.row(tone);
      }
      const VectorXcd m = xk * c0;
      for (Index i = 0; i < nk; ++i) out.mean(known[static_cast<std::size_t>(i)]) += m(i);
      block.cov += xk * p0 * xk.adjoint();
    }
    // random rows: zero-mean unit-power symbols, variance |c|^2 q_k S q_k^H
    const VectorXd quad = (q * second).cwiseProduct(q.conjugate()).rowwise().sum().real();
    for (Index i = 0; i < n; ++i) {
      const Index tone = tones[static_cast<std::size_t>(i)];
      if (pilot_mask[static_cast<std::size_t>(tone)]) continue;
      out.diag(i) += std::norm(c) * quad(tone);
    }
  }
  if (nk > 0) {
    hermitize(block.cov);
    for (Index i : known) out.diag(i) = 0.0;
    out.blocks.push_back(std::move(block));
  }
  return out;
}

NoiseStats estimation_noise_stats(const std::vector<InterfererStats>& interferers,
                                  const VectorXd& noise_var, const std::vector<bool>& pilot_mask,
                                  int num_paths, NoiseFlavor flavor) {
  if (flavor == NoiseFlavor::Detection)
    throw ConfigError("estimation_noise_stats: detection flavor requested");
  std::vector<Index> tones(pilot_mask.size());
  for (std::size_t i = 0; i < tones.size(); ++i) tones[i] = static_cast<Index>(i);
  std::vector<NoiseStats> parts;
  for (Index s = 0; s < noise_var.size(); ++s)
    parts.push_back(satellite_noise_stats(interferers, static_cast<int>(s), noise_var(s), tones,
                                          pilot_mask, num_paths,
                                          flavor == NoiseFlavor::EstimationAugmented));
  return stack_noise(parts);
}

SoftMeasurementMoments soft_measurement_moments(const SoftSymbols& soft, const VectorXcd& gains,
                                                int num_paths) {
  SoftMeasurementMoments out;
  out.mean = build_measurement_matrix(soft.mean, gains, num_paths);
  const MatrixXcd q = dft_columns(static_cast<int>(soft.mean.size()), num_paths);
  for (Index s = 0; s < gains.size(); ++s) {
    const double c2 = std::norm(gains(s));
    MatrixXcd gram = c2 * q.adjoint() * soft.second.cast<cd>().asDiagonal() * q;
    hermitize(gram);
    MatrixXcd cov = gram - out.mean.blocks[static_cast<std::size_t>(s)].adjoint() *
                               out.mean.blocks[static_cast<std::size_t>(s)];
    out.cov_sqrt.push_back(hermitian_sqrt_clipped(cov));
    out.gram.push_back(std::move(gram));
  }
  return out;
}

SoftSymbols expectation_tones(const MatrixXcd& y, const MatrixXcd& h_eff, const VectorXd& weights,
                              const Constellation& c) {
  const Index k = y.rows();
  const Index s = y.cols();
  if (h_eff.rows() != k || h_eff.cols() != s || weights.size() != s)
    throw DimensionMismatch("expectation: shapes differ");
  VectorXd a(k), cc(k);
  VectorXcd b(k);
  kernels::tone_stats(y.data(), h_eff.data(), weights.data(), static_cast<std::size_t>(k),
                      static_cast<std::size_t>(s), a.data(), b.data(), cc.data());
  SoftSymbols out;
  out.mean.resize(k);
  out.second.resize(k);
  const std::size_t m = c.size();
  std::vector<double> logit(m);
  for (Index t = 0; t < k; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const cd r = c.points[i];
      // -(y - h r)^H R^{-1} (y - h r) without the r-independent a_k term
      logit[i] = 2.0 * (std::conj(r) * b(t)).real() - cc(t) * std::norm(r);
      best = std::max(best, logit[i]);
    }
    double z = 0.0, second = 0.0;
    cd mean{0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::exp(logit[i] - best);
      z += w;
      mean += w * c.points[i];
      second += w * std::norm(c.points[i]);
    }
    out.mean(t) = mean / z;
    out.second(t) = second / z;
  }
  return out;
}

SoftSymbol expectation_step(const VectorXcd& y, const VectorXcd& h_eff, const NoiseStats& r,
                            const Constellation& c) {
  if (!r.blocks.empty()) throw DimensionMismatch("expectation needs a diagonal noise covariance");
  const VectorXd w = r.diag.cwiseInverse();
  const SoftSymbols s = expectation_tones(y.transpose(), h_eff.transpose(), w, c);
  return {s.mean(0), s.second(0)};
}

}  // namespace leoipac
