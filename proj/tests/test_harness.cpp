#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "leoipac/errors.hpp"
#include "leoipac/harness.hpp"
#include "leoipac/report.hpp"

using namespace leoipac;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.scenario.num_users = 2;
  c.scenario.num_subcarriers = 64;
  c.scenario.array_horizontal = 4;
  c.scenario.array_vertical = 4;
  c.jude.num_pilots = 8;
  c.jude.slots = 2;
  c.positioning.fim_subcarriers = 16;
  c.harness.position_steps = 3;
  return c;
}

SlotOutcome slot(long e, long b, double err, double pow) {
  SlotOutcome s;
  s.bit_errors = e;
  s.bits = b;
  s.channel = {err, pow};
  return s;
}

std::string csv_of(const std::vector<MetricsRecord>& r) {
  std::ostringstream os;
  write_metrics_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Metrics, NmseExamples) {
  const std::vector<VectorXcd> h{VectorXcd::LinSpaced(4, 1.0, 4.0).cast<cd>()};
  EXPECT_EQ(nmse(h, h), 0.0);
  EXPECT_DOUBLE_EQ(nmse({VectorXcd::Zero(4)}, h), 1.0);
  EXPECT_DOUBLE_EQ(nmse({(2.0 * h[0]).eval()}, h), 1.0);
  EXPECT_THROW(nmse({VectorXcd::Zero(3)}, h), DimensionMismatch);
}

TEST(Metrics, AggregatesOverBitsAndEnergy) {
  TrialRecord a, b, f;
  a.outcome["jude"] = {{slot(1, 10, 1.0, 10.0)}};
  b.outcome["jude"] = {{slot(9, 90, 1.0, 1.0), slot(0, 0, 0.0, 0.0)}};
  a.pos_err = {3.0};
  a.vel_err = {0.3};
  b.pos_err = {4.0};
  b.vel_err = {0.4};
  f.failed = true;
  f.error = "FilterDiverged: test";
  const auto r = compute_metrics("num_users", 2, {"jude"}, {a, b, f});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].bits, 100);
  EXPECT_EQ(r[0].bit_errors, 10);
  EXPECT_DOUBLE_EQ(r[0].ber, 0.1);
  EXPECT_NEAR(r[0].nmse_db, 10 * std::log10(2.0 / 11.0), 1e-12);
  EXPECT_EQ(r[0].trials_used, 2);
  EXPECT_EQ(r[0].trials_failed, 1);
  EXPECT_NEAR(r[0].position_rmse, std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(r[0].velocity_rmse, std::sqrt(0.125), 1e-12);
}

TEST(Metrics, ExactChannelFloor) {
  TrialRecord a;
  a.outcome["perfect_csi"] = {{slot(0, 10, 0.0, 5.0)}};
  const auto r = compute_metrics("x", 0, {"perfect_csi"}, {a});
  EXPECT_NEAR(r[0].nmse_db, -300.0, 1e-9);
  EXPECT_TRUE(std::isfinite(r[0].nmse_db));
}

TEST(Harness, CombMask) {
  const auto m = comb_pilot_mask(16, 4);
  int n = 0;
  for (int k = 0; k < 16; ++k) {
    n += m[k];
    EXPECT_EQ(m[k], k % 4 == 0);
  }
  EXPECT_EQ(n, 4);
  EXPECT_THROW(comb_pilot_mask(16, 5), ConfigError);
}

TEST(Harness, SpecParsing) {
  ScenarioConfig base;
  const auto s = parse_experiment_spec(
      "[sweep]\ntrials = 3\nschemes = jude, ml_without_position@2\nseparation_m = 2000, 20000\n", base);
  EXPECT_EQ(s.trials, 3);
  ASSERT_EQ(s.axes.size(), 1u);
  EXPECT_EQ(s.axes[0].values.size(), 2u);
  EXPECT_EQ(s.schemes[1], "ml_without_position@2");
  EXPECT_THROW(parse_experiment_spec("[sweep]\nbogus = 1\nnum_users = 1\n", base), ConfigError);
  EXPECT_THROW(parse_experiment_spec("[sweep]\ntrials = 0\nnum_users = 1\n", base), ConfigError);
  EXPECT_THROW(parse_experiment_spec("[sweep]\ntrials = 2\n", base), ConfigError);
  EXPECT_THROW(parse_experiment_spec("[sweep]\nschemes = magic\nnum_users = 1\n", base), ConfigError);
  EXPECT_NEAR(apply_axis(base, "ut_power_dbm", 40).scenario.ut_power, 10.0, 1e-12);
}

TEST(Harness, TrialDeterministicAndSane) {
  const auto c = small_config();
  const auto scene = build_scene(c, 42);
  ASSERT_EQ(scene.users.size(), 2u);
  const std::vector<std::string> schemes{"jude", "pilot_only_kf", "perfect_csi", "ml_with_position",
                                         "ml_without_position"};
  const auto a = run_trial(scene, schemes);
  const auto b = run_trial(build_scene(c, 42), schemes);
  for (const auto& s : schemes) {
    const auto& x = a.at(s);
    const auto& y = b.at(s);
    ASSERT_EQ(x.size(), 2u);
    for (std::size_t u = 0; u < x.size(); ++u)
      for (std::size_t t = 0; t < x[u].size(); ++t) {
        EXPECT_EQ(x[u][t].bit_errors, y[u][t].bit_errors);
        EXPECT_EQ(x[u][t].channel.error, y[u][t].channel.error);
        EXPECT_GT(x[u][t].bits, 0);
        EXPECT_LE(x[u][t].bit_errors, x[u][t].bits);
      }
  }
  EXPECT_EQ(a.at("perfect_csi")[0][0].channel.error, 0.0);
}

// Estimated taps are rebuilt on the estimated steering, so exact taps only
// give an exact channel when the positions are exact.
TEST(Harness, TapChannelErrorZeroOnTruth) {
  auto c = small_config();
  c.harness.truth_positions = true;
  const auto scene = build_scene(c, 3);
  const VectorXcd g = VectorXcd::Ones(scene.ar_true[0].size());
  const auto e = tap_channel_error(scene, 0, g, g);
  EXPECT_EQ(e.error, 0.0);
  EXPECT_GT(e.power, 0.0);
  const auto est = tap_channel_error(build_scene(small_config(), 3), 0, g, g);
  EXPECT_GT(est.error, 0.0);
}

TEST(Harness, EstimatedGeometryUsed) {
  const auto scene = build_scene(small_config(), 5);
  const auto& l = scene.links[0][0];
  EXPECT_NE(l.estimate.distance, l.truth.distance);
  EXPECT_GT(scene.users[0].pos_err, 0.0);
  auto c = small_config();
  c.harness.truth_positions = true;
  const auto truth = build_scene(c, 5);
  EXPECT_EQ(truth.links[0][0].estimate.distance, truth.links[0][0].truth.distance);
}

TEST(Harness, SweepReproducibleAcrossJobs) {
  ExperimentSpec spec;
  spec.base = small_config();
  spec.trials = 3;
  spec.schemes = {"jude", "pilot_only_kf"};
  spec.axes = {{"num_users", {1, 2}}};
  const auto a = run_sweep(spec, 7, 1);
  const auto b = run_sweep(spec, 7, 3);
  const std::string ca = csv_of(a.records);
  EXPECT_EQ(ca, csv_of(b.records));
  EXPECT_EQ(ca.rfind("# leo-ipac-sim v", 0), 0u);
  for (const auto& r : a.records) {
    EXPECT_EQ(r.trials_used + r.trials_failed, spec.trials);
    EXPECT_GE(r.ber, 0.0);
    EXPECT_LE(r.ber, 0.5 + 0.05);
    EXPECT_TRUE(std::isfinite(r.nmse_db));
  }
}

TEST(Harness, FailedTrialsAreCounted) {
  ExperimentSpec spec;
  spec.base = small_config();
  spec.base.positioning.divergence_ceiling = 1e-3;
  spec.trials = 2;
  spec.schemes = {"jude"};
  spec.axes = {{"num_users", {1}}};
  const auto r = run_sweep(spec, 1, 1);
  EXPECT_EQ(r.failed_trials, 2);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].trials_used, 0);
  EXPECT_EQ(r.records[0].trials_failed, 2);
}

TEST(Report, SvgChart) {
  const std::string svg = svg_line_chart("t", "x", "y", {{"jude", {{1, 0.1}, {2, 0.01}}}}, true);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("jude"), std::string::npos);
}
