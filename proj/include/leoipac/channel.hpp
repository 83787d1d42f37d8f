#pragma once

#include <vector>

#include "leoipac/config.hpp"
#include "leoipac/rng.hpp"
#include "leoipac/scenario.hpp"
#include "leoipac/types.hpp"

namespace leoipac {

/// a = a_h (x) a_v, so the vertical element index varies fastest.
VectorXcd array_response(double az, double el, int mh, int mv, double spacing);
VectorXcd array_response(const LinkGeometry& g, const ScenarioConfig& config);

struct ArrayDerivatives {
  VectorXcd a;
  VectorXcd d_az;
  VectorXcd d_el;
};
ArrayDerivatives array_response_derivatives(double az, double el, int mh, int mv,
                                            double spacing);

struct FadingBudget {
  double fs_db = 0.0;
  double sf_db = 0.0;
  double cl_db = 0.0;
  double ab_db = 0.0;
  double sc_db = 0.0;
  double shadow_draw = 0.0;  // X
  double beta = 0.0;         // linear gain, 10^(-total/10)

  double total_db() const { return fs_db + sf_db + cl_db + ab_db + sc_db; }
};

/// Loss terms with an explicit shadowing draw X. Elevation enters the
/// shadowing spread in radians.
FadingBudget large_scale_fading(double distance, double elevation, const ScenarioConfig& config,
                                double shadow_draw);
FadingBudget large_scale_fading(const LinkGeometry& g, const ScenarioConfig& config,
                                RngStream& rng);

struct PathParams {
  std::vector<cd> gains;       // g_p, entry 0 unused by the LoS term
  std::vector<double> doppler; // Hz
  std::vector<double> delay;   // s
  std::vector<double> rel_delay;
  double rician_factor = 1.0;
};

/// Relative delays on the sample grid p / (K df).
std::vector<double> tap_delays(const ScenarioConfig& config);

PathParams make_path_params(const LinkGeometry& g, const ScenarioConfig& config, RngStream& rng);

/// h = sqrt(beta / (kappa + 1)) G(t, k) a with t the OFDM symbol index.
VectorXcd sample_time_frequency_channel(const PathParams& path, const FadingBudget& fade,
                                        const VectorXcd& a, double t, int k,
                                        double subcarrier_spacing);

struct TapLink {
  double ut_doppler = 0.0;  // Hz
  double beta = 0.0;        // linear
};

/// Diagonal AR(1) model g' = F g + G u, stored as diagonals.
struct ArMatrices {
  VectorXd f;           // per tap
  VectorXd g;           // per tap
  VectorXd stationary;  // per-tap variance of the stationary law
  VectorXd los_power;   // C_s per satellite
  int num_paths = 1;

  Index size() const { return f.size(); }
  MatrixXd dense_f() const { return f.asDiagonal(); }
  MatrixXd dense_g() const { return g.asDiagonal(); }
  MatrixXcd process_cov() const { return g.cwiseAbs2().cast<cd>().asDiagonal(); }
};

ArMatrices build_ar_matrices(const std::vector<TapLink>& links, const ScenarioConfig& config);

struct TapPrior {
  VectorXcd mean;
  MatrixXcd cov;
};

/// Stationary: mean 0, cov = stationary law. ProcessNoise: mean carries C_s
/// on the first tap of each satellite and cov = G G^H.
TapPrior tap_prior(const ArMatrices& ar, TapPriorMode mode);
VectorXcd draw_taps(const TapPrior& prior, RngStream& rng);

VectorXcd evolve_taps(const VectorXcd& g, const ArMatrices& ar, RngStream& rng);

/// First P columns of the K-point DFT matrix, entries exp(-j 2 pi k p / K).
MatrixXcd dft_columns(int k, int p);

/// h(k) = sum_p g_p exp(-j 2 pi k df dtau_p) a.
VectorXcd reconstruct_frequency_channel(const VectorXcd& taps, const std::vector<double>& rel_delay,
                                        const VectorXcd& a, int k, double subcarrier_spacing);

/// Scalar frequency response sum_p g_p exp(-j 2 pi k df dtau_p) for every tone.
VectorXcd tap_frequency_response(const VectorXcd& taps, const std::vector<double>& rel_delay,
                                 int num_subcarriers, double subcarrier_spacing);

}  // namespace leoipac
