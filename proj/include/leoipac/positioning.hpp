#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "leoipac/config.hpp"
#include "leoipac/fim.hpp"
#include "leoipac/rng.hpp"
#include "leoipac/scenario.hpp"
#include "leoipac/ukf.hpp"

namespace leoipac {

/// State layout: [p (3), v (3), b (S)].
VectorXd process_function(const VectorXd& zeta, const Vec3& accel, double dt);
MatrixXd process_noise_cov(const Mat3& accel_cov, double dt, int num_satellites);

/// Stacked (doppler, delay) per satellite. Throws DegenerateGeometry when
/// the UT is within 1 m of a satellite.
VectorXd measurement_function(const VectorXd& zeta, const std::vector<SatelliteState>& sats,
                              double wavelength);

UserTruth state_to_truth(const VectorXd& zeta);
VectorXd truth_to_state(const UserTruth& truth);

/// Downlink pilot links seen from `zeta`, with the satellite precoders
/// steered towards `pointing` (a position). Shadowing draws may be empty
/// (deterministic fading) or one per satellite.
std::vector<LinkFimInput> downlink_links(const VectorXd& zeta, const Vec3& pointing,
                                         const std::vector<SatelliteState>& sats,
                                         const ScenarioConfig& config,
                                         const std::vector<double>& shadow_draws = {});

/// Equivalent FIM J(rho) for the links above.
MatrixXd measurement_information(const VectorXd& zeta, const Vec3& pointing,
                                 const std::vector<SatelliteState>& sats,
                                 const ScenarioConfig& config,
                                 const std::vector<double>& shadow_draws = {});

/// rho = h(zeta) + N(0, J^-1).
VectorXd simulate_measurement(const VectorXd& true_state, const std::vector<SatelliteState>& sats,
                              double wavelength, const MatrixXd& information, RngStream& rng);

struct PositioningOptions {
  int steps = -1;                       // -1: as many as the trajectory allows
  std::optional<UkfState> initial;      // default: perturbed truth
  bool noiseless_measurements = false;
  std::optional<bool> cache_fim;        // default: config value
};

struct PositioningStep {
  int step = 0;
  double pos_err = 0.0;   // m
  double vel_err = 0.0;   // m/s
  double bias_err = 0.0;  // s, Euclidean norm over satellites
  double trace_p = 0.0;
};

struct PositioningResult {
  std::vector<PositioningStep> steps;
  std::vector<UkfState> history;  // posterior after each step
  UkfState final_state;
};

UkfState default_initial_state(const UserTruth& truth, const ScenarioConfig& config,
                               std::uint64_t seed);

/// Throws FilterDiverged when the position error exceeds the configured
/// ceiling.
PositioningResult run_positioning(const Trajectory& traj, const ScenarioConfig& config,
                                  std::uint64_t seed, const PositioningOptions& opts = {});

/// RMS position and velocity error over steps [first, end).
std::pair<double, double> rms_errors(const PositioningResult& r, std::size_t first);

}  // namespace leoipac
