#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "leoipac/channel.hpp"
#include "leoipac/config.hpp"
#include "leoipac/jude.hpp"
#include "leoipac/scenario.hpp"

namespace leoipac {

/// One UT at the start of the communication frame.
struct UserSetup {
  UserTruth truth;
  UserTruth estimate;
  double pos_err = 0.0;
  double vel_err = 0.0;
};

struct LinkPair {
  LinkGeometry truth;
  LinkGeometry estimate;
  double beta_true = 0.0;  // with shadowing
  double beta_est = 0.0;   // deterministic part only
  VectorXcd a_true;
  VectorXcd a_est;
};

/// Geometry of one trial after the positioning phase.
struct TrialScene {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  double frame_time = 0.0;
  std::vector<SatelliteState> sats;
  std::vector<UserSetup> users;
  std::vector<std::vector<LinkPair>> links;  // [u][s]
  std::vector<ArMatrices> ar_true;           // per UT, transmit power folded in
  std::vector<ArMatrices> ar_est;
};

/// Places the UTs on the square, runs the positioning phase (or takes the
/// truth when config.harness.truth_positions is set) and builds the links.
TrialScene build_scene(const ScenarioConfig& config, std::uint64_t seed);

/// Comb of num_pilots tones, spacing K / num_pilots, starting at tone 0.
std::vector<bool> comb_pilot_mask(int num_subcarriers, int num_pilots);

/// Received frame for one pilot layout.
struct FrameData {
  std::vector<bool> pilot_mask;
  std::vector<std::vector<VectorXcd>> symbols;  // [u][t], K
  std::vector<std::vector<std::vector<int>>> indices;  // [u][t][k], -1 on pilots
  std::vector<std::vector<VectorXcd>> taps;     // [u][t], S*P
  std::vector<std::vector<MatrixXcd>> mrc;      // [u][t], K x S
  bool has_unstructured = false;
  /// Per-antenna estimate without position: normalized combiner output,
  /// combiner norm, and channel error sums.
  std::vector<std::vector<MatrixXcd>> free_y;     // [u][t], K x S
  std::vector<std::vector<MatrixXcd>> free_heff;  // [u][t], K x S
  std::vector<std::vector<double>> free_err;      // [u][t]
  std::vector<std::vector<double>> free_power;    // [u][t]
};

/// With unstructured = false only combiner outputs are produced and the
/// noise is drawn directly in that space (same law as per-antenna noise
/// followed by the combiners, different draws).
FrameData simulate_frame(const TrialScene& scene, int num_pilots, bool unstructured);

/// Running interferer priors: [u][t] filtered pilot-only estimates.
using RunningPriors = std::vector<std::vector<TapPrior>>;
RunningPriors running_priors(const TrialScene& scene, const FrameData& frame);

/// JUDE inputs for UT u, built from estimated geometry only. Interferer
/// priors are the initial law, or the running estimates when given.
JudeProblem make_problem(const TrialScene& scene, const FrameData& frame, int u,
                         const RunningPriors* running = nullptr);

struct ChannelError {
  double error = 0.0;  // sum |h_hat - h|^2
  double power = 0.0;  // sum |h|^2
};

/// Error of M-antenna channels rebuilt from taps on the estimated steering
/// against the true channels, over all satellites and tones of one slot.
ChannelError tap_channel_error(const TrialScene& scene, int u, const VectorXcd& est_taps,
                               const VectorXcd& true_taps);

/// sum |est - truth|^2 / sum |truth|^2 over all entries.
double nmse(const std::vector<VectorXcd>& est, const std::vector<VectorXcd>& truth);

struct SlotOutcome {
  long bit_errors = 0;
  long bits = 0;
  ChannelError channel;
  int em_iterations = 0;
};

/// scheme -> [u][t]
using TrialOutcome = std::map<std::string, std::vector<std::vector<SlotOutcome>>>;

/// Scheme names: jude, pilot_only_kf, perfect_csi, ml_with_position,
/// ml_without_position, each optionally suffixed with @m for m times the
/// configured pilot count.
TrialOutcome run_trial(const TrialScene& scene, const std::vector<std::string>& schemes);

std::vector<std::string> known_schemes();

struct SweepAxis {
  std::string name;  // ut_power_dbm | pilot_count | separation_m | num_users
  std::vector<double> values;
};

struct ExperimentSpec {
  ScenarioConfig base;
  std::vector<SweepAxis> axes;
  int trials = 1;
  std::vector<std::string> schemes;

  void validate() const;
};

/// [sweep] section with keys trials, schemes and one list per axis.
ExperimentSpec parse_experiment_spec(const std::string& ini_text, const ScenarioConfig& base);
ExperimentSpec load_experiment_spec(const std::string& path, const ScenarioConfig& base);

ScenarioConfig apply_axis(const ScenarioConfig& base, const std::string& axis, double value);

struct MetricsRecord {
  std::string axis;
  double value = 0.0;
  std::string scheme;
  double ber = 0.0;
  double ber_se = 0.0;
  double nmse_db = 0.0;
  double nmse_se_db = 0.0;
  double position_rmse = 0.0;
  double velocity_rmse = 0.0;
  long bits = 0;
  long bit_errors = 0;
  int trials_used = 0;
  int trials_failed = 0;
};

/// Per-trial results of one sweep point, in trial order. A failed trial
/// keeps its error text and no outcome.
struct TrialRecord {
  bool failed = false;
  std::string error;
  TrialOutcome outcome;
  std::vector<double> pos_err;
  std::vector<double> vel_err;
};

/// Aggregation is over bits and channel energy, not over per-trial ratios.
std::vector<MetricsRecord> compute_metrics(const std::string& axis, double value,
                                           const std::vector<std::string>& schemes,
                                           const std::vector<TrialRecord>& trials);

/// Seed shared by every sweep point for a given trial index.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Runs one trial; exceptions from the modules are caught and recorded.
TrialRecord run_trial_record(const ScenarioConfig& config, const std::vector<std::string>& schemes,
                             std::uint64_t seed);

struct SweepResult {
  std::vector<MetricsRecord> records;
  int failed_trials = 0;
};

/// Trials run on `jobs` threads; the reduce is ordered by (axis, value,
/// trial) so the output does not depend on scheduling.
SweepResult run_sweep(const ExperimentSpec& spec, std::uint64_t master_seed, int jobs = 1);

}  // namespace leoipac
