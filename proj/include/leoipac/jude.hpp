#pragma once

#include <vector>

#include "leoipac/channel.hpp"
#include "leoipac/constellation.hpp"
#include "leoipac/jude_model.hpp"
#include "leoipac/kalman.hpp"

namespace leoipac {

/// Everything one UT's receiver knows for a frame of T slots.
struct JudeProblem {
  int num_satellites = 1;
  int num_subcarriers = 1;
  int num_paths = 1;
  int slots = 1;
  Constellation constellation;
  std::vector<bool> pilot_mask;
  std::vector<VectorXcd> pilots;   // per slot, own K-vector, read on pilot tones
  VectorXcd own_gains;             // w_s^H a(theta_s), M for MRC
  VectorXd noise_var;              // per satellite, at the combiner output
  ArMatrices ar;
  TapPrior initial;                // g_{0|-1}, P_{0|-1}
  /// interferers[t] for slot t; a single entry is reused for every slot.
  std::vector<std::vector<InterfererStats>> interferers;
  std::vector<MatrixXcd> y;        // per slot, K x S combiner outputs
  int em_iterations = 5;
  double em_tolerance = 1e-4;

  const std::vector<InterfererStats>& interferers_at(int t) const;
  void validate() const;
};

struct JudeEstimate {
  std::vector<VectorXcd> taps;       // g_{t|t}
  std::vector<MatrixXcd> tap_covs;   // P_{t|t}
  std::vector<SoftSymbols> soft;     // final posterior moments
  std::vector<std::vector<int>> detected;  // constellation index per tone, -1 on pilots
  int em_iterations_used = 0;
};

/// Optional per-iteration record of the tap trajectory (entry 0 is the
/// pilot-only pass).
struct JudeTrace {
  std::vector<std::vector<VectorXcd>> taps;
};

/// Per-satellite M-step system for one slot: rows for the listed tones plus
/// P virtual rows when any listed tone carries symbol uncertainty.
struct SatelliteSystem {
  MatrixXcd x;
  VectorXcd y;
  NoiseStats noise;
};
SatelliteSystem build_satellite_system(const JudeProblem& pb, int t, int s,
                                       const std::vector<Index>& tones, const SoftSymbols& own);

/// One KF step on the augmented system of every satellite at once.
KfStepResult maximization_step(const JudeProblem& pb, int t, const SoftSymbols& own,
                               const KfState& predicted);

/// Taps from the pilot tones only.
JudeEstimate pilot_only_kf(const JudeProblem& pb);
/// The EM loop started from the pilot-only pass.
JudeEstimate jude_estimate(const JudeProblem& pb, JudeTrace* trace = nullptr);
/// Soft detection and demapping with a given effective channel per slot
/// (K x S). Fills soft and detected.
void detect_symbols(const JudeProblem& pb, const std::vector<MatrixXcd>& h_eff, JudeEstimate& est);

/// h_eff(k, s) = gains(s) q_k^T g_s
MatrixXcd effective_channel(const VectorXcd& taps, const VectorXcd& gains, int num_subcarriers,
                            int num_paths);

/// log p(y | g) + log p(g) for a single-slot problem, symbols marginalized
/// under the uniform prior. Used to check EM ascent.
double single_slot_log_posterior(const JudeProblem& pb, const VectorXcd& taps);

}  // namespace leoipac
