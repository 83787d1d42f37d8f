#pragma once

#include <vector>

#include "leoipac/channel.hpp"
#include "leoipac/constellation.hpp"
#include "leoipac/kalman.hpp"
#include "leoipac/types.hpp"

namespace leoipac {

/// Posterior moments of one symbol.
struct SoftSymbol {
  cd mean{0.0, 0.0};
  double second = 0.0;  // E|r|^2
};

/// Per (slot, UT) soft symbols over K tones. Pilot tones carry the known
/// symbol with zero variance.
struct SoftSymbols {
  VectorXcd mean;
  VectorXd second;

  static SoftSymbols hard(const VectorXcd& symbols);
  VectorXd variance() const;
};

/// Block-diagonal X with one K x P block per satellite.
struct MeasurementMatrix {
  std::vector<MatrixXcd> blocks;

  Index rows() const;
  Index cols() const;
  MatrixXcd dense() const;
};

/// An interfering UT as seen through the combiner of the UT of interest.
struct InterfererStats {
  VectorXcd gains;   // w_s^H a(theta_{s,u'}) per satellite
  TapPrior prior;    // S*P taps
  VectorXcd pilots;  // K symbols, meaningful on pilot tones
};

/// entry s = w_s^H h_s
VectorXcd mrc_effective_channel(const std::vector<VectorXcd>& h, const std::vector<VectorXcd>& w);

/// Diagonal S x S detection noise. noise_var holds the noise variance at the
/// combiner output, i.e. ||w_s||^2 sigma^2.
NoiseStats detection_noise_cov(const std::vector<InterfererStats>& interferers,
                               const VectorXd& noise_var, int num_paths);

/// Block s = gains(s) diag(symbols) Q_P.
MeasurementMatrix build_measurement_matrix(const VectorXcd& symbols, const VectorXcd& gains,
                                           int num_paths);

/// Noise rows of satellite s restricted to the listed tones. Tones in the
/// pilot mask get the deterministic form (interferer pilots known, full
/// covariance across those rows); the rest get the random form (zero mean,
/// independent). With augmented = true, P virtual rows of variance noise_var
/// follow.
NoiseStats satellite_noise_stats(const std::vector<InterfererStats>& interferers, int s,
                                 double noise_var, const std::vector<Index>& tones,
                                 const std::vector<bool>& pilot_mask, int num_paths,
                                 bool augmented);

/// All satellites stacked, K (+P) rows each.
NoiseStats estimation_noise_stats(const std::vector<InterfererStats>& interferers,
                                  const VectorXd& noise_var, const std::vector<bool>& pilot_mask,
                                  int num_paths, NoiseFlavor flavor);

struct SoftMeasurementMoments {
  MeasurementMatrix mean;          // E[X]
  std::vector<MatrixXcd> gram;     // E[X^H X] per satellite, P x P
  std::vector<MatrixXcd> cov_sqrt; // (E[X^H X] - E[X]^H E[X])^{1/2}
};

SoftMeasurementMoments soft_measurement_moments(const SoftSymbols& soft, const VectorXcd& gains,
                                                int num_paths);

/// Posterior moments under a uniform prior on the alphabet. R must be
/// diagonal (detection flavor).
SoftSymbol expectation_step(const VectorXcd& y, const VectorXcd& h_eff, const NoiseStats& r,
                            const Constellation& c);

/// Same for every tone at once: y and h are K x S, weights are 1/R_ss.
SoftSymbols expectation_tones(const MatrixXcd& y, const MatrixXcd& h_eff, const VectorXd& weights,
                              const Constellation& c);

}  // namespace leoipac
