#include "leoipac/jude.hpp"

#include <limits>

#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

namespace {

std::vector<Index> pilot_tones(const JudeProblem& pb) {
  std::vector<Index> t;
  for (std::size_t k = 0; k < pb.pilot_mask.size(); ++k)
    if (pb.pilot_mask[k]) t.push_back(static_cast<Index>(k));
  return t;
}

std::vector<Index> all_tones(const JudeProblem& pb) {
  std::vector<Index> t(static_cast<std::size_t>(pb.num_subcarriers));
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<Index>(k);
  return t;
}

// Pilot symbols on pilot tones, zero elsewhere, as hard moments.
SoftSymbols pilot_symbols(const JudeProblem& pb, int t) {
  SoftSymbols s;
  s.mean = VectorXcd::Zero(pb.num_subcarriers);
  s.second = VectorXd::Zero(pb.num_subcarriers);
  for (Index k = 0; k < pb.num_subcarriers; ++k) {
    if (!pb.pilot_mask[static_cast<std::size_t>(k)]) continue;
    s.mean(k) = pb.pilots[static_cast<std::size_t>(t)](k);
    s.second(k) = std::norm(s.mean(k));
  }
  return s;
}

// Overwrites pilot tones with the known symbols.
void pin_pilots(const JudeProblem& pb, int t, SoftSymbols& s) {
  for (Index k = 0; k < pb.num_subcarriers; ++k) {
    if (!pb.pilot_mask[static_cast<std::size_t>(k)]) continue;
    s.mean(k) = pb.pilots[static_cast<std::size_t>(t)](k);
    s.second(k) = std::norm(s.mean(k));
  }
}

KfState slice(const KfState& st, int s, int p) {
  const Index o = static_cast<Index>(s) * p;
  return {st.mean.segment(o, p), st.cov.block(o, o, p, p)};
}

// Forward KF over all slots, satellite by satellite. soft == nullptr means
// the pilot-only pass.
void kf_pass(const JudeProblem& pb, const std::vector<SoftSymbols>* soft, JudeEstimate& est) {
  const int S = pb.num_satellites, P = pb.num_paths;
  const std::vector<Index> tones = soft ? all_tones(pb) : pilot_tones(pb);
  est.taps.assign(static_cast<std::size_t>(pb.slots), VectorXcd::Zero(S * P));
  est.tap_covs.assign(static_cast<std::size_t>(pb.slots), MatrixXcd::Zero(S * P, S * P));
  for (int s = 0; s < S; ++s) {
    const Index o = static_cast<Index>(s) * P;
    KfState pred = slice({pb.initial.mean, pb.initial.cov}, s, P);
    const VectorXd f = pb.ar.f.segment(o, P), g = pb.ar.g.segment(o, P);
    for (int t = 0; t < pb.slots; ++t) {
      const SoftSymbols own = soft ? (*soft)[static_cast<std::size_t>(t)] : pilot_symbols(pb, t);
      const SatelliteSystem sys = build_satellite_system(pb, t, s, tones, own);
      const KfStepResult r = kf_step(pred, sys.x, sys.y, sys.noise, f, g);
      est.taps[static_cast<std::size_t>(t)].segment(o, P) = r.filtered.mean;
      est.tap_covs[static_cast<std::size_t>(t)].block(o, o, P, P) = r.filtered.cov;
      pred = r.predicted;
    }
  }
}

std::vector<SoftSymbols> e_step(const JudeProblem& pb, const std::vector<VectorXcd>& taps) {
  std::vector<SoftSymbols> out;
  for (int t = 0; t < pb.slots; ++t) {
    const MatrixXcd h = effective_channel(taps[static_cast<std::size_t>(t)], pb.own_gains,
                                          pb.num_subcarriers, pb.num_paths);
    const NoiseStats r = detection_noise_cov(pb.interferers_at(t), pb.noise_var, pb.num_paths);
    SoftSymbols s = expectation_tones(pb.y[static_cast<std::size_t>(t)], h, r.diag.cwiseInverse(),
                                      pb.constellation);
    pin_pilots(pb, t, s);
    out.push_back(std::move(s));
  }
  return out;
}

void demap_all(const JudeProblem& pb, JudeEstimate& est) {
  est.detected.clear();
  for (int t = 0; t < pb.slots; ++t) {
    std::vector<int> d(static_cast<std::size_t>(pb.num_subcarriers), -1);
    for (Index k = 0; k < pb.num_subcarriers; ++k) {
      if (pb.pilot_mask[static_cast<std::size_t>(k)]) continue;
      d[static_cast<std::size_t>(k)] =
          demap(est.soft[static_cast<std::size_t>(t)].mean(k), pb.constellation).index;
    }
    est.detected.push_back(std::move(d));
  }
}

double relative_change(const std::vector<VectorXcd>& now, const std::vector<VectorXcd>& prev) {
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < now.size(); ++t) {
    num += (now[t] - prev[t]).squaredNorm();
    den += prev[t].squaredNorm();
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace

const std::vector<InterfererStats>& JudeProblem::interferers_at(int t) const {
  static const std::vector<InterfererStats> none;
  if (interferers.empty()) return none;
  if (interferers.size() == 1) return interferers.front();
  return interferers[static_cast<std::size_t>(t)];
}

void JudeProblem::validate() const {
  const auto S = static_cast<Index>(num_satellites);
  const auto K = static_cast<Index>(num_subcarriers);
  if (static_cast<Index>(pilot_mask.size()) != K) throw DimensionMismatch("pilot mask length");
  bool any = false;
  for (bool b : pilot_mask) any = any || b;
  if (!any) throw NoPilots("pilot mask is empty");
  if (num_paths > num_subcarriers) throw DimensionMismatch("more taps than subcarriers");
  if (static_cast<int>(y.size()) != slots || static_cast<int>(pilots.size()) != slots)
    throw DimensionMismatch("per-slot inputs do not cover every slot");
  for (int t = 0; t < slots; ++t) {
    if (y[static_cast<std::size_t>(t)].rows() != K || y[static_cast<std::size_t>(t)].cols() != S)
      throw DimensionMismatch("observation must be K x S");
    if (pilots[static_cast<std::size_t>(t)].size() != K) throw DimensionMismatch("pilot vector length");
  }
  if (own_gains.size() != S || noise_var.size() != S) throw DimensionMismatch("per-satellite vectors");
  if (ar.size() != S * num_paths || initial.mean.size() != S * num_paths)
    throw DimensionMismatch("tap model size");
  if (interferers.size() > 1 && static_cast<int>(interferers.size()) != slots)
    throw DimensionMismatch("running interferer priors must cover every slot");
}

MatrixXcd effective_channel(const VectorXcd& taps, const VectorXcd& gains, int num_subcarriers,
                            int num_paths) {
  const MatrixXcd q = dft_columns(num_subcarriers, num_paths);
  MatrixXcd h(num_subcarriers, gains.size());
  for (Index s = 0; s < gains.size(); ++s)
    h.col(s) = gains(s) * (q * taps.segment(s * num_paths, num_paths));
  return h;
}

SatelliteSystem build_satellite_system(const JudeProblem& pb, int t, int s,
                                       const std::vector<Index>& tones, const SoftSymbols& own) {
  const int P = pb.num_paths;
  const Index n = static_cast<Index>(tones.size());
  const MatrixXcd q = dft_columns(pb.num_subcarriers, P);
  const cd c = pb.own_gains(s);
  const double v = pb.noise_var(s);
  const VectorXd var = own.variance();

  bool uncertain = false;
  VectorXd w(n);
  for (Index i = 0; i < n; ++i) {
    w(i) = var(tones[static_cast<std::size_t>(i)]);
    uncertain = uncertain || w(i) > 0.0;
  }

  SatelliteSystem sys;
  sys.noise = satellite_noise_stats(pb.interferers_at(t), s, v, tones, pb.pilot_mask, P, uncertain);
  const Index rows = n + (uncertain ? P : 0);
  sys.x = MatrixXcd::Zero(rows, P);
  sys.y = VectorXcd::Zero(rows);
  const MatrixXcd& obs = pb.y[static_cast<std::size_t>(t)];
  for (Index i = 0; i < n; ++i) {
    const Index k = tones[static_cast<std::size_t>(i)];
    sys.x.row(i) = c * own.mean(k) * q.row(k);
    sys.y(i) = obs(k, s);
  }
  if (uncertain) {
    // Expected quadratic penalty E[(X - EX)^H R^{-1} (X - EX)] written as
    // virtual rows of variance v with zero observation.
    for (Index i = 0; i < n; ++i) w(i) /= sys.noise.diag(i) > 0.0 ? sys.noise.diag(i) : v;
    MatrixXcd qs(n, P);
    for (Index i = 0; i < n; ++i) qs.row(i) = q.row(tones[static_cast<std::size_t>(i)]);
    MatrixXcd cov = std::norm(c) * qs.adjoint() * w.cast<cd>().asDiagonal() * qs;
    sys.x.bottomRows(P) = std::sqrt(v) * hermitian_sqrt_clipped(cov);
  }
  return sys;
}

KfStepResult maximization_step(const JudeProblem& pb, int t, const SoftSymbols& own,
                               const KfState& predicted) {
  const int S = pb.num_satellites, P = pb.num_paths;
  const std::vector<Index> tones = all_tones(pb);
  std::vector<SatelliteSystem> parts;
  Index rows = 0;
  for (int s = 0; s < S; ++s) {
    parts.push_back(build_satellite_system(pb, t, s, tones, own));
    rows += parts.back().x.rows();
  }
  MatrixXcd x = MatrixXcd::Zero(rows, S * P);
  VectorXcd y(rows);
  std::vector<NoiseStats> noise;
  Index r = 0;
  for (int s = 0; s < S; ++s) {
    const auto& p = parts[static_cast<std::size_t>(s)];
    x.block(r, static_cast<Index>(s) * P, p.x.rows(), P) = p.x;
    y.segment(r, p.y.size()) = p.y;
    noise.push_back(p.noise);
    r += p.x.rows();
  }
  return kf_step(predicted, x, y, stack_noise(noise), pb.ar);
}

void detect_symbols(const JudeProblem& pb, const std::vector<MatrixXcd>& h_eff, JudeEstimate& est) {
  est.soft.clear();
  for (int t = 0; t < pb.slots; ++t) {
    const NoiseStats r = detection_noise_cov(pb.interferers_at(t), pb.noise_var, pb.num_paths);
    SoftSymbols s = expectation_tones(pb.y[static_cast<std::size_t>(t)],
                                      h_eff[static_cast<std::size_t>(t)], r.diag.cwiseInverse(),
                                      pb.constellation);
    pin_pilots(pb, t, s);
    est.soft.push_back(std::move(s));
  }
  demap_all(pb, est);
}

JudeEstimate pilot_only_kf(const JudeProblem& pb) {
  pb.validate();
  JudeEstimate est;
  kf_pass(pb, nullptr, est);
  est.soft = e_step(pb, est.taps);
  demap_all(pb, est);
  return est;
}

JudeEstimate jude_estimate(const JudeProblem& pb, JudeTrace* trace) {
  pb.validate();
  JudeEstimate est;
  kf_pass(pb, nullptr, est);
  if (trace) trace->taps.push_back(est.taps);
  for (int n = 0; n < pb.em_iterations; ++n) {
    const std::vector<SoftSymbols> soft = e_step(pb, est.taps);
    const std::vector<VectorXcd> prev = est.taps;
    kf_pass(pb, &soft, est);
    est.em_iterations_used = n + 1;
    if (trace) trace->taps.push_back(est.taps);
    if (relative_change(est.taps, prev) < pb.em_tolerance) break;
  }
  est.soft = e_step(pb, est.taps);
  demap_all(pb, est);
  return est;
}

double single_slot_log_posterior(const JudeProblem& pb, const VectorXcd& taps) {
  const MatrixXcd h = effective_channel(taps, pb.own_gains, pb.num_subcarriers, pb.num_paths);
  const NoiseStats r = detection_noise_cov(pb.interferers_at(0), pb.noise_var, pb.num_paths);
  const MatrixXcd& y = pb.y.front();
  double ll = 0.0;
  for (Index k = 0; k < pb.num_subcarriers; ++k) {
    auto metric = [&](cd sym) {
      double m = 0.0;
      for (Index s = 0; s < y.cols(); ++s) m += std::norm(y(k, s) - h(k, s) * sym) / r.diag(s);
      return -m;
    };
    if (pb.pilot_mask[static_cast<std::size_t>(k)]) {
      ll += metric(pb.pilots.front()(k));
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> v;
    for (const cd& p : pb.constellation.points) {
      v.push_back(metric(p));
      best = std::max(best, v.back());
    }
    double z = 0.0;
    for (double x : v) z += std::exp(x - best);
    ll += best + std::log(z / static_cast<double>(v.size()));
  }
  const VectorXcd d = taps - pb.initial.mean;
  Eigen::LDLT<MatrixXcd> ldlt(pb.initial.cov);
  ll -= (d.adjoint() * ldlt.solve(d))(0, 0).real();
  return ll;
}

}  // namespace leoipac
