#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "leoipac/types.hpp"

namespace leoipac {

enum class Modulation { Bpsk, Qpsk, Psk8, Psk16 };

std::string to_string(Modulation m);
Modulation parse_modulation(const std::string& text);

enum class InterfererPriorMode { Frozen, Running };
enum class TapPriorMode { Stationary, ProcessNoise };

struct ScenarioSection {
  int num_satellites = 5;
  int num_users = 4;
  double carrier_frequency = 12.7e9;    // Hz
  double subcarrier_spacing = 120e3;    // Hz
  int num_subcarriers = 256;
  int array_horizontal = 16;
  int array_vertical = 16;
  double antenna_spacing = 0.5;         // wavelengths
  /// Transmit powers are per subcarrier, stored in watts.
  double sat_power = 100.0;             // 50 dBm
  double ut_power = 1.0;                // 30 dBm
  double noise_power = 4.786e-16;       // -123.2 dBm, kT*df at 290 K
  double orbit_altitude = 500e3;        // m
  double earth_radius = 6400e3;         // m
  Modulation modulation = Modulation::Psk16;
  double update_interval = 1.0;         // s
  Mat3 accel_noise_cov = 0.01 * Mat3::Identity();  // (m/s^2)^2
  std::uint64_t master_seed = 1;

  double ref_latitude_deg = 0.0;
  double ref_longitude_deg = 0.0;
  double epoch = 0.0;                   // s, constellation time of step 0
  /// Per-satellite orbital elements in degrees. Empty means the default
  /// pattern for num_satellites.
  std::vector<double> sat_inclination_deg;
  std::vector<double> sat_raan_deg;
  std::vector<double> sat_phase_deg;

  double ut_speed = 10.0;               // m/s
  double ut_heading_deg = 0.0;          // from east towards north
  double ut_accel_amplitude = 0.2;      // m/s^2
  double ut_accel_period = 60.0;        // s
  double clock_bias_std = 1e-6;         // s
  double user_separation = 20e3;        // m, side of the UT square
};

struct ChannelSection {
  int num_paths = 4;
  double rician_factor = 10.0;          // linear
  double decay_exponent = 1.0;
  double atmospheric_loss_db = 0.5;
  double shadow_v_sigma = 1.5;          // placeholder, not a measured value
  double shadow_v_theta = -0.5;         // placeholder, not a measured value
};

struct PositioningSection {
  int pilot_symbols = 16;               // G
  int fim_subcarriers = 64;             // 0 means scenario.num_subcarriers
  double ukf_alpha = 1e-3;
  double ukf_beta = 2.0;
  double ukf_kappa = 0.0;
  double epsilon_scale = 1e-6;
  double divergence_ceiling = 1e5;      // m
  bool cache_fim = false;
  double nuisance_ridge = 1e-9;
  double init_position_std = 100.0;     // m, offset of the initial mean
  double init_position_var = 1e4;       // m^2
  double init_velocity_var = 1e2;       // (m/s)^2
  double init_bias_var = 1e-6;          // s^2
  int steps = 200;
};

struct JudeSection {
  int num_pilots = 16;
  int slots = 8;
  int em_iterations = 5;
  double em_tolerance = 1e-4;
  InterfererPriorMode interferer_priors = InterfererPriorMode::Frozen;
  TapPriorMode tap_prior = TapPriorMode::Stationary;
  int trials = 1;
};

struct HarnessSection {
  int position_steps = 20;
  bool truth_positions = false;
};

/// Fully resolved configuration. Values are in SI units; dBm fields of the
/// file are converted at parse time.
struct ScenarioConfig {
  ScenarioSection scenario;
  ChannelSection channel;
  PositioningSection positioning;
  JudeSection jude;
  HarnessSection harness;

  double wavelength() const { return kSpeedOfLight / scenario.carrier_frequency; }
  double symbol_duration() const { return 1.0 / scenario.subcarrier_spacing; }
  int num_antennas() const { return scenario.array_horizontal * scenario.array_vertical; }
  int fim_subcarriers() const {
    return positioning.fim_subcarriers > 0 ? positioning.fim_subcarriers
                                           : scenario.num_subcarriers;
  }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Parses INI text. Unknown sections or keys are rejected.
ScenarioConfig parse_config(const std::string& ini_text);
ScenarioConfig load_config(const std::string& path);
/// Writes every resolved key back out in the file format.
void write_config(std::ostream& os, const ScenarioConfig& config);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace leoipac
