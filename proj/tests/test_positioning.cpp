#include <gtest/gtest.h>

#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"
#include "leoipac/positioning.hpp"

using namespace leoipac;

namespace {

ScenarioConfig fast_config() {
  ScenarioConfig c;
  c.positioning.fim_subcarriers = 16;
  c.positioning.cache_fim = true;
  return c;
}

}  // namespace

TEST(Process, Examples) {
  VectorXd z(8);
  z << 1, 2, 3, 0, 0, 0, 1e-3, -2e-3;
  EXPECT_EQ(process_function(z, Vec3::Zero(), 1.0), z);
  VectorXd y = VectorXd::Zero(7);
  y(3) = 1.0;
  y(6) = 5e-4;
  const VectorXd out = process_function(y, Vec3(2, 0, 0), 1.0);
  EXPECT_NEAR(out(0), 2.0, 1e-15);
  EXPECT_NEAR(out(3), 3.0, 1e-15);
  EXPECT_EQ(out(6), 5e-4);
}

TEST(Process, NoiseCovariance) {
  const MatrixXd q = process_noise_cov(Mat3::Identity(), 1.0, 2);
  ASSERT_EQ(q.rows(), 8);
  EXPECT_TRUE(q.block(0, 0, 3, 3).isApprox(0.25 * MatrixXd::Identity(3, 3)));
  EXPECT_TRUE(q.block(0, 3, 3, 3).isApprox(0.5 * MatrixXd::Identity(3, 3)));
  EXPECT_TRUE(q.block(3, 3, 3, 3).isApprox(MatrixXd::Identity(3, 3)));
  EXPECT_EQ(q.block(6, 0, 2, 8).norm(), 0.0);
  EXPECT_TRUE(is_psd(q));
  EXPECT_EQ(process_noise_cov(Mat3::Zero(), 1.0, 2).norm(), 0.0);
}

TEST(Measurement, Examples) {
  SatelliteState sat;
  sat.position = Vec3(6.7e6, 0, 0);
  sat.velocity = Vec3(0, 7600, 0);
  VectorXd z(7);
  z << 6.4e6, 0, 0, 0, 7600, 0, 1e-3;
  const double lambda = 0.0236;
  VectorXd rho = measurement_function(z, {sat}, lambda);
  EXPECT_EQ(rho(0), 0.0);
  EXPECT_NEAR(rho(1), 3e5 / kSpeedOfLight + 1e-3, 1e-15);
  EXPECT_NEAR(rho(1), 2.0007e-3, 1e-7);

  z.segment(3, 3) = Vec3(100, -50, 20);
  const double d1 = measurement_function(z, {sat}, lambda)(0);
  sat.velocity = 2 * sat.velocity - z.segment<3>(3);
  const VectorXd rho2 = measurement_function(z, {sat}, lambda);
  EXPECT_NEAR(rho2(0), 2 * d1, 1e-9 * std::abs(d1));
  EXPECT_EQ(rho2(1), rho(1));

  z.head(3) = sat.position;
  EXPECT_THROW(measurement_function(z, {sat}, lambda), DegenerateGeometry);
}

TEST(Measurement, NoiseMatchesInverseFim) {
  const auto c = fast_config();
  const auto traj = generate_user_trajectory(c, 1, 5);
  const auto sats = propagate_constellation(c, 0.0);
  const VectorXd z = truth_to_state(traj.truth[0]);
  const MatrixXd info = measurement_information(z, traj.truth[0].position, sats, c);
  const MatrixXd cov = spd_inverse(info);
  const VectorXd h = measurement_function(z, sats, c.wavelength());
  RngStream rng(9);
  const int n = 10000;
  VectorXd sum = VectorXd::Zero(h.size());
  VectorXd sq = VectorXd::Zero(h.size());
  for (int i = 0; i < n; ++i) {
    const VectorXd d = simulate_measurement(z, sats, c.wavelength(), info, rng) - h;
    sum += d;
    sq += d.cwiseAbs2();
  }
  for (Index i = 0; i < h.size(); ++i) {
    const double sd = std::sqrt(cov(i, i));
    EXPECT_LT(std::abs(sum(i) / n), 4 * sd / std::sqrt(n));
    EXPECT_NEAR(sq(i) / n, cov(i, i), 0.05 * cov(i, i));
  }
}

TEST(Measurement, ClockBiasObservable) {
  const auto c = fast_config();
  const auto traj = generate_user_trajectory(c, 1, 5);
  const auto sats = propagate_constellation(c, 0.0);
  const MatrixXd info =
      measurement_information(truth_to_state(traj.truth[0]), traj.truth[0].position, sats, c);
  EXPECT_TRUE(is_psd(info));
  EXPECT_LT(scaled_condition(info), 1e12);
}

TEST(Positioning, NoiselessExactStart) {
  auto c = fast_config();
  c.scenario.accel_noise_cov.setZero();
  const auto traj = generate_user_trajectory(c, 30, 2);
  PositioningOptions opts;
  opts.noiseless_measurements = true;
  UkfState init;
  init.mean = truth_to_state(traj.truth[0]);
  init.cov = 1e-12 * MatrixXd::Identity(init.mean.size(), init.mean.size());
  opts.initial = init;
  const auto r = run_positioning(traj, c, 2, opts);
  for (const auto& s : r.steps) EXPECT_LE(s.pos_err, 1e-6);
}

TEST(Positioning, CovarianceStaysPsd) {
  const auto c = fast_config();
  const auto traj = generate_user_trajectory(c, 40, 3);
  PositioningOptions opts;
  opts.steps = 40;
  const auto r = run_positioning(traj, c, 3, opts);
  ASSERT_EQ(r.steps.size(), 40u);
  for (const auto& s : r.history) {
    EXPECT_EQ(s.cov, s.cov.transpose());
    EXPECT_TRUE(is_psd(s.cov));
  }
  EXPECT_LT(r.steps.back().pos_err, 50.0);
}

TEST(Positioning, Deterministic) {
  const auto c = fast_config();
  const auto traj = generate_user_trajectory(c, 10, 4);
  const auto a = run_positioning(traj, c, 4);
  const auto b = run_positioning(traj, c, 4);
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].pos_err, b.steps[i].pos_err);
  EXPECT_EQ(a.final_state.mean, b.final_state.mean);
}

TEST(Positioning, DivergenceCeiling) {
  auto c = fast_config();
  c.positioning.divergence_ceiling = 1.0;
  const auto traj = generate_user_trajectory(c, 5, 4);
  EXPECT_THROW(run_positioning(traj, c, 4), FilterDiverged);
}
