#pragma once

// Independent reference computations for the JUDE stack: a synthetic
// single-UT problem, the batch linear-Gaussian posterior and exhaustive
// MAP detection.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "leoipac/channel.hpp"
#include "leoipac/constellation.hpp"
#include "leoipac/jude.hpp"
#include "leoipac/rng.hpp"

namespace leoipac::oracle {

struct SyntheticProblem {
  JudeProblem pb;
  std::vector<VectorXcd> truth;             // per slot, S*P
  std::vector<VectorXcd> symbols;           // per slot, K (pilots included)
  std::vector<std::vector<int>> indices;    // per slot, -1 on pilots
};

struct SyntheticSpec {
  int satellites = 1;
  int subcarriers = 4;
  int paths = 2;
  int slots = 3;
  Modulation modulation = Modulation::Qpsk;
  std::vector<bool> pilot_mask;  // empty: every tone is a pilot
  double noise_var = 0.1;        // at the combiner output
  double symbol_doppler_t = 0.05;  // v^ut T, drawn in [0, value]
  /// When set, overrides noise_var per satellite so that the received tap
  /// power over the noise variance equals this ratio.
  std::optional<double> snr_db;
};

inline SyntheticProblem make_problem(const SyntheticSpec& spec, RngStream& rng) {
  const int S = spec.satellites, K = spec.subcarriers, P = spec.paths, T = spec.slots;
  ScenarioConfig cfg;
  cfg.channel.num_paths = P;
  cfg.scenario.num_subcarriers = K;
  std::vector<TapLink> links;
  for (int s = 0; s < S; ++s) {
    links.push_back(TapLink{spec.symbol_doppler_t * rng.uniform() / cfg.symbol_duration(),
                            0.5 + rng.uniform()});
  }
  SyntheticProblem out;
  JudeProblem& pb = out.pb;
  pb.num_satellites = S;
  pb.num_subcarriers = K;
  pb.num_paths = P;
  pb.slots = T;
  pb.constellation = make_constellation(spec.modulation);
  pb.pilot_mask = spec.pilot_mask.empty() ? std::vector<bool>(static_cast<std::size_t>(K), true)
                                          : spec.pilot_mask;
  pb.ar = build_ar_matrices(links, cfg);
  pb.initial = tap_prior(pb.ar, TapPriorMode::Stationary);
  pb.own_gains.resize(S);
  for (int s = 0; s < S; ++s) pb.own_gains(s) = std::polar(0.5 + rng.uniform(), kTwoPi * rng.uniform());
  pb.noise_var = VectorXd::Constant(S, spec.noise_var);
  if (spec.snr_db) {
    for (int s = 0; s < S; ++s) {
      const double power = std::norm(pb.own_gains(s)) * pb.ar.stationary.segment(s * P, P).sum();
      pb.noise_var(s) = power / db_to_linear(*spec.snr_db);
    }
  }

  const MatrixXcd q = dft_columns(K, P);
  const auto& pts = pb.constellation.points;
  VectorXcd g = draw_taps(pb.initial, rng);
  for (int t = 0; t < T; ++t) {
    if (t > 0) g = evolve_taps(g, pb.ar, rng);
    VectorXcd x(K), pilots(K);
    std::vector<int> idx(static_cast<std::size_t>(K), -1);
    for (int k = 0; k < K; ++k) {
      const int i = rng.uniform_int(0, static_cast<int>(pts.size()) - 1);
      x(k) = pts[static_cast<std::size_t>(i)];
      pilots(k) = x(k);
      if (!pb.pilot_mask[static_cast<std::size_t>(k)]) idx[static_cast<std::size_t>(k)] = i;
    }
    MatrixXcd y(K, S);
    for (int s = 0; s < S; ++s) {
      const VectorXcd h = pb.own_gains(s) * (q * g.segment(s * P, P));
      for (int k = 0; k < K; ++k) y(k, s) = h(k) * x(k) + rng.complex_normal(pb.noise_var(s));
    }
    pb.y.push_back(y);
    pb.pilots.push_back(pilots);
    out.truth.push_back(g);
    out.symbols.push_back(x);
    out.indices.push_back(idx);
  }
  return out;
}

/// Joint Gaussian over the stacked taps g_{0..T-1} under the AR model.
struct JointPrior {
  VectorXcd mean;
  MatrixXcd cov;
};

inline JointPrior joint_prior(const JudeProblem& pb, int T) {
  const Index n = pb.ar.size();
  JointPrior jp;
  jp.mean.resize(n * T);
  jp.cov = MatrixXcd::Zero(n * T, n * T);
  std::vector<MatrixXcd> marg(static_cast<std::size_t>(T));
  VectorXcd m = pb.initial.mean;
  MatrixXcd c = pb.initial.cov;
  const MatrixXcd F = pb.ar.f.cast<cd>().asDiagonal();
  for (int t = 0; t < T; ++t) {
    if (t > 0) {
      m = F * m;
      c = F * c * F.adjoint() + pb.ar.process_cov();
    }
    jp.mean.segment(t * n, n) = m;
    marg[static_cast<std::size_t>(t)] = c;
  }
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= t; ++u) {
      MatrixXcd fp = MatrixXcd::Identity(n, n);
      for (int i = u; i < t; ++i) fp = F * fp;
      const MatrixXcd block = fp * marg[static_cast<std::size_t>(u)];
      jp.cov.block(t * n, u * n, n, n) = block;
      jp.cov.block(u * n, t * n, n, n) = block.adjoint();
    }
  }
  return jp;
}

/// Stacked observation model for slots 0..T-1 with hard symbols and white
/// noise: y = H g + n.
inline void stacked_model(const JudeProblem& pb, const std::vector<VectorXcd>& symbols, int T,
                          MatrixXcd& h, VectorXcd& y, VectorXd& noise) {
  const int S = pb.num_satellites, K = pb.num_subcarriers, P = pb.num_paths;
  const Index n = static_cast<Index>(S) * P;
  const Index rows = static_cast<Index>(S) * K;
  h = MatrixXcd::Zero(rows * T, n * T);
  y.resize(rows * T);
  noise.resize(rows * T);
  const MatrixXcd q = dft_columns(K, P);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const MatrixXcd blk = pb.own_gains(s) * symbols[static_cast<std::size_t>(t)].asDiagonal() * q;
      h.block(t * rows + s * K, t * n + s * P, K, P) = blk;
      y.segment(t * rows + s * K, K) = pb.y[static_cast<std::size_t>(t)].col(s);
      noise.segment(t * rows + s * K, K).setConstant(pb.noise_var(s));
    }
  }
}

/// E[g_t | y_0..t] by direct conditioning of the joint Gaussian.
inline std::vector<VectorXcd> batch_filtered_means(const JudeProblem& pb,
                                                   const std::vector<VectorXcd>& symbols) {
  std::vector<VectorXcd> out;
  const Index n = pb.ar.size();
  for (int t = 0; t < pb.slots; ++t) {
    const JointPrior jp = joint_prior(pb, t + 1);
    MatrixXcd h;
    VectorXcd y;
    VectorXd v;
    stacked_model(pb, symbols, t + 1, h, y, v);
    const MatrixXcd sy = h * jp.cov * h.adjoint() + MatrixXcd(v.cast<cd>().asDiagonal());
    const MatrixXcd cross = jp.cov.middleRows(t * n, n) * h.adjoint();
    const VectorXcd innov = y - h * jp.mean;
    out.push_back(jp.mean.segment(t * n, n) + cross * sy.partialPivLu().solve(innov));
  }
  return out;
}

/// log p(y_0..T-1 | symbols) with the taps marginalized.
inline double log_evidence(const JudeProblem& pb, const std::vector<VectorXcd>& symbols) {
  const JointPrior jp = joint_prior(pb, pb.slots);
  MatrixXcd h;
  VectorXcd y;
  VectorXd v;
  stacked_model(pb, symbols, pb.slots, h, y, v);
  const MatrixXcd sy = h * jp.cov * h.adjoint() + MatrixXcd(v.cast<cd>().asDiagonal());
  const Eigen::LDLT<MatrixXcd> ldlt(sy);
  const VectorXcd r = y - h * jp.mean;
  double logdet = 0.0;
  for (Index i = 0; i < ldlt.vectorD().size(); ++i) logdet += std::log(ldlt.vectorD()(i).real());
  return -(r.adjoint() * ldlt.solve(r))(0, 0).real() - logdet;
}

/// Joint MAP over every data symbol of every slot under a uniform prior.
/// Returns constellation indices per slot (-1 on pilots).
inline std::vector<std::vector<int>> exhaustive_map(const JudeProblem& pb) {
  std::vector<std::pair<int, int>> data;  // (slot, tone)
  for (int t = 0; t < pb.slots; ++t)
    for (int k = 0; k < pb.num_subcarriers; ++k)
      if (!pb.pilot_mask[static_cast<std::size_t>(k)]) data.emplace_back(t, k);
  const int m = static_cast<int>(pb.constellation.size());
  long total = 1;
  for (std::size_t i = 0; i < data.size(); ++i) total *= m;
  std::vector<VectorXcd> sym = pb.pilots;
  double best = -std::numeric_limits<double>::infinity();
  long best_code = 0;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (const auto& [t, k] : data) {
      sym[static_cast<std::size_t>(t)](k) = pb.constellation.points[static_cast<std::size_t>(c % m)];
      c /= m;
    }
    const double e = log_evidence(pb, sym);
    if (e > best) {
      best = e;
      best_code = code;
    }
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(pb.slots),
                                    std::vector<int>(static_cast<std::size_t>(pb.num_subcarriers), -1));
  long c = best_code;
  for (const auto& [t, k] : data) {
    out[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = static_cast<int>(c % m);
    c /= m;
  }
  return out;
}

inline double relative_error(const VectorXcd& a, const VectorXcd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace leoipac::oracle
