#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "leoipac/config.hpp"
#include "leoipac/errors.hpp"
#include "leoipac/harness.hpp"
#include "leoipac/kernels/kernels.hpp"
#include "leoipac/positioning.hpp"
#include "leoipac/report.hpp"
#include "leoipac/rng.hpp"
#include "leoipac/scenario.hpp"

namespace {

leoipac::ScenarioConfig load_or_default(const std::string& path) {
  if (path.empty()) return leoipac::ScenarioConfig{};
  return leoipac::load_config(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw leoipac::ConfigError("cannot write " + path);
  out << std::setprecision(10);
  return out;
}

int cmd_position(const std::string& config_path, std::uint64_t seed, const std::string& out_path) {
  leoipac::ScenarioConfig cfg = load_or_default(config_path);
  cfg.scenario.master_seed = seed;
  cfg.validate();
  const int steps = cfg.positioning.steps;
  const auto traj = leoipac::generate_user_trajectory(
      cfg, steps, leoipac::derive_seed(seed, leoipac::StreamPurpose::Trajectory));
  const auto res = leoipac::run_positioning(traj, cfg, seed);
  auto out = open_out(out_path);
  out << "step,pos_err_m,vel_err_m,bias_err_s,trace_P\n";
  for (const auto& s : res.steps)
    out << s.step << ',' << s.pos_err << ',' << s.vel_err << ',' << s.bias_err << ',' << s.trace_p << '\n';
  const auto [p, v] = leoipac::rms_errors(res, res.steps.size() / 2);
  std::cout << "converged rms: position " << p << " m, velocity " << v << " m/s\n";
  return 0;
}

int cmd_jude(const std::string& config_path, std::uint64_t seed, const std::string& out_path) {
  leoipac::ScenarioConfig cfg = load_or_default(config_path);
  cfg.validate();
  auto out = open_out(out_path);
  out << "trial,slot,ut,snr_db_or_power_dbm,ber,nmse,em_iters_used\n";
  const double power_dbm = leoipac::watts_to_dbm(cfg.scenario.ut_power);
  int failed = 0;
  for (int trial = 0; trial < cfg.jude.trials; ++trial) {
    const auto rec = leoipac::run_trial_record(cfg, {"jude"}, leoipac::trial_seed(seed, trial));
    if (rec.failed) {
      std::cerr << "trial " << trial << " failed: " << rec.error << '\n';
      ++failed;
      continue;
    }
    const auto& uts = rec.outcome.at("jude");
    for (std::size_t u = 0; u < uts.size(); ++u)
      for (std::size_t t = 0; t < uts[u].size(); ++t) {
        const auto& s = uts[u][t];
        out << trial << ',' << t << ',' << u << ',' << power_dbm << ','
            << (s.bits ? static_cast<double>(s.bit_errors) / static_cast<double>(s.bits) : 0.0) << ','
            << s.channel.error / s.channel.power << ',' << s.em_iterations << '\n';
      }
  }
  return failed == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& spec_path, std::uint64_t seed,
              const std::string& out_dir, int jobs, bool truth_positions) {
  leoipac::ScenarioConfig cfg = load_or_default(config_path);
  if (truth_positions) cfg.harness.truth_positions = true;
  cfg.validate();
  const auto spec = leoipac::load_experiment_spec(spec_path, cfg);
  const auto result = leoipac::run_sweep(spec, seed, jobs);
  std::filesystem::create_directories(out_dir);
  auto out = open_out((std::filesystem::path(out_dir) / "metrics.csv").string());
  leoipac::write_metrics_csv(out, result.records);
  for (const auto& p : leoipac::write_svg_plots(out_dir, result.records)) std::cout << "wrote " << p << '\n';
  std::cout << "records: " << result.records.size() << ", failed trials: " << result.failed_trials << '\n';
  for (const auto& r : result.records)
    if (r.trials_used == 0) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO multi-satellite positioning and uplink channel estimation simulator"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel variant: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::string config_path, spec_path, out_path, out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool truth_positions = false;

  auto* pos = app.add_subcommand("position", "Run the downlink UKF positioning on one trajectory");
  pos->add_option("--config", config_path, "INI configuration");
  pos->add_option("--seed", seed, "Master seed");
  pos->add_option("--out", out_path, "Per-step CSV")->required();

  auto* jude = app.add_subcommand("jude", "Run JUDE trials and write per-slot results");
  jude->add_option("--config", config_path, "INI configuration");
  jude->add_option("--seed", seed, "Master seed");
  jude->add_option("--out", out_path, "Per-slot CSV")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep with baselines");
  sweep->add_option("--config", config_path, "INI configuration");
  sweep->add_option("--spec", spec_path, "Experiment spec INI")->required();
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--out-dir", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--truth-positions", truth_positions, "Feed true UT positions to the receiver");

  auto* show = app.add_subcommand("show-config", "Print the fully resolved configuration");
  show->add_option("--config", config_path, "INI configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    namespace k = leoipac::kernels;
    if (simd == "scalar") k::set_active_isa(k::Isa::Scalar);
    if (simd == "avx2") k::set_active_isa(k::Isa::Avx2);
    if (*pos) return cmd_position(config_path, seed, out_path);
    if (*jude) return cmd_jude(config_path, seed, out_path);
    if (*sweep) return cmd_sweep(config_path, spec_path, seed, out_dir, jobs, truth_positions);
    if (*show) {
      const auto cfg = load_or_default(config_path);
      cfg.validate();
      leoipac::write_config(std::cout, cfg);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
