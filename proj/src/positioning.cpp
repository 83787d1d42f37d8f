#include "leoipac/positioning.hpp"

#include "leoipac/channel.hpp"
#include "leoipac/errors.hpp"
#include "leoipac/linalg.hpp"

namespace leoipac {

VectorXd process_function(const VectorXd& zeta, const Vec3& accel, double dt) {
  VectorXd out = zeta;
  out.segment<3>(0) += zeta.segment<3>(3) * dt + 0.5 * dt * dt * accel;
  out.segment<3>(3) += accel * dt;
  return out;
}

MatrixXd process_noise_cov(const Mat3& ca, double dt, int num_satellites) {
  const Index L = 6 + num_satellites;
  MatrixXd q = MatrixXd::Zero(L, L);
  q.block<3, 3>(0, 0) = std::pow(dt, 4) / 4.0 * ca;
  q.block<3, 3>(0, 3) = std::pow(dt, 3) / 2.0 * ca;
  q.block<3, 3>(3, 0) = std::pow(dt, 3) / 2.0 * ca.transpose();
  q.block<3, 3>(3, 3) = dt * dt * ca;
  return q;
}

UserTruth state_to_truth(const VectorXd& zeta) {
  UserTruth t;
  t.position = zeta.segment<3>(0);
  t.velocity = zeta.segment<3>(3);
  t.clock_biases = zeta.tail(zeta.size() - 6);
  return t;
}

VectorXd truth_to_state(const UserTruth& truth) {
  VectorXd z(6 + truth.clock_biases.size());
  z << truth.position, truth.velocity, truth.clock_biases;
  return z;
}

VectorXd measurement_function(const VectorXd& zeta, const std::vector<SatelliteState>& sats,
                              double wavelength) {
  const Vec3 p = zeta.segment<3>(0);
  const Vec3 v = zeta.segment<3>(3);
  const Index S = static_cast<Index>(sats.size());
  if (zeta.size() != 6 + S) throw DimensionMismatch("state length does not match satellite count");
  VectorXd rho(2 * S);
  for (Index s = 0; s < S; ++s) {
    const auto& sat = sats[static_cast<std::size_t>(s)];
    const Vec3 rel = p - sat.position;
    const double d = rel.norm();
    if (d < 1.0) throw DegenerateGeometry("UT within 1 m of a satellite");
    rho(2 * s) = (sat.velocity - v).dot(rel) / (wavelength * d);
    rho(2 * s + 1) = d / kSpeedOfLight + zeta(6 + s);
  }
  return rho;
}

std::vector<LinkFimInput> downlink_links(const VectorXd& zeta, const Vec3& pointing,
                                         const std::vector<SatelliteState>& sats,
                                         const ScenarioConfig& config,
                                         const std::vector<double>& shadow_draws) {
  const auto& sc = config.scenario;
  const UserTruth ut = state_to_truth(zeta);
  UserTruth aim = ut;
  aim.position = pointing;
  std::vector<LinkFimInput> links;
  links.reserve(sats.size());
  for (std::size_t s = 0; s < sats.size(); ++s) {
    const int si = static_cast<int>(s);
    const LinkGeometry g = link_geometry(sats[s], ut, config, si);
    const LinkGeometry ga = link_geometry(sats[s], aim, config, si);
    const double x = shadow_draws.empty() ? 0.0 : shadow_draws[s];
    const FadingBudget fade = large_scale_fading(g.distance, g.elevation, config, x);
    const double kappa = config.channel.rician_factor;

    LinkFimInput in;
    in.doppler = g.los_doppler;
    in.delay = g.los_delay;
    in.az = g.aod_az;
    in.el = g.aod_el;
    in.amplitude = std::sqrt(fade.beta * kappa / (kappa + 1.0));
    in.sample_var = fade.beta * sc.sat_power / (kappa + 1.0) + sc.noise_power;
    in.mh = sc.array_horizontal;
    in.mv = sc.array_vertical;
    in.spacing = sc.antenna_spacing;
    in.subcarrier_spacing = sc.subcarrier_spacing;
    in.num_symbols = config.positioning.pilot_symbols;
    in.num_subcarriers = config.fim_subcarriers();
    in.precoders.push_back(steering_precoder(ga.aod_az, ga.aod_el, in.mh, in.mv, in.spacing,
                                             sc.sat_power));
    links.push_back(std::move(in));
  }
  return links;
}

MatrixXd measurement_information(const VectorXd& zeta, const Vec3& pointing,
                                 const std::vector<SatelliteState>& sats,
                                 const ScenarioConfig& config,
                                 const std::vector<double>& shadow_draws) {
  return compute_fim(downlink_links(zeta, pointing, sats, config, shadow_draws),
                     config.positioning.nuisance_ridge)
      .equivalent;
}

VectorXd simulate_measurement(const VectorXd& true_state, const std::vector<SatelliteState>& sats,
                              double wavelength, const MatrixXd& information, RngStream& rng) {
  const VectorXd mean = measurement_function(true_state, sats, wavelength);
  const MatrixXd cov = spd_inverse(information);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  const MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  VectorXd z(mean.size());
  for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + root * z;
}

UkfState default_initial_state(const UserTruth& truth, const ScenarioConfig& config,
                               std::uint64_t seed) {
  const auto& pc = config.positioning;
  const int S = config.scenario.num_satellites;
  RngStream rng(derive_seed(seed, StreamPurpose::InitialState));
  UkfState st;
  st.mean = VectorXd::Zero(6 + S);
  for (int i = 0; i < 3; ++i) st.mean(i) = truth.position(i) + pc.init_position_std * rng.normal();
  st.cov = MatrixXd::Zero(6 + S, 6 + S);
  st.cov.diagonal().segment<3>(0).setConstant(pc.init_position_var);
  st.cov.diagonal().segment<3>(3).setConstant(pc.init_velocity_var);
  st.cov.diagonal().tail(S).setConstant(pc.init_bias_var);
  return st;
}

namespace {

// eps * diag(J^-1) + sum wc J^-1(x_l), computed about the centre point.
MatrixXd fim_noise(const SigmaSet& set, const Vec3& pointing,
                   const std::vector<SatelliteState>& sats, const ScenarioConfig& config,
                   bool cache) {
  const MatrixXd c0 = spd_inverse(measurement_information(set.points.col(0), pointing, sats, config));
  MatrixXd acc = set.wc.sum() * c0;
  if (!cache) {
    for (Index i = 1; i < set.points.cols(); ++i) {
      const MatrixXd ci = spd_inverse(measurement_information(set.points.col(i), pointing, sats, config));
      acc.noalias() += set.wc(i) * (ci - c0);
    }
  }
  symmetrize(acc);
  acc.diagonal() += config.positioning.epsilon_scale * c0.diagonal();
  return acc;
}

}  // namespace

PositioningResult run_positioning(const Trajectory& traj, const ScenarioConfig& config,
                                  std::uint64_t seed, const PositioningOptions& opts) {
  const auto& sc = config.scenario;
  const int S = sc.num_satellites;
  const int available = static_cast<int>(traj.truth.size()) - 1;
  const int steps = opts.steps < 0 ? available : std::min(opts.steps, available);
  if (steps < 1) throw ConfigError("positioning needs at least one step");
  const bool cache = opts.cache_fim.value_or(config.positioning.cache_fim);
  const UkfParams up{config.positioning.ukf_alpha, config.positioning.ukf_beta,
                     config.positioning.ukf_kappa};
  const double dt = sc.update_interval;
  const double lambda = config.wavelength();
  const MatrixXd q = process_noise_cov(sc.accel_noise_cov, dt, S);

  RngStream shadow_rng(derive_seed(seed, StreamPurpose::ShadowFading));
  std::vector<double> shadow(static_cast<std::size_t>(S));
  for (auto& x : shadow) x = shadow_rng.normal();
  RngStream meas_rng(derive_seed(seed, StreamPurpose::MeasurementNoise));

  UkfState state = opts.initial ? *opts.initial : default_initial_state(traj.truth[0], config, seed);
  PositioningResult result;
  for (int n = 1; n <= steps; ++n) {
    const auto& accel = traj.measured_accel[static_cast<std::size_t>(n - 1)];
    const UkfState pred = ukf_predict(
        state, [&](const VectorXd& z) { return process_function(z, accel, dt); }, q, up);

    const auto sats = propagate_constellation(config, sc.epoch + n * dt);
    const Vec3 pointing = pred.mean.segment<3>(0);
    const VectorXd truth = truth_to_state(traj.truth[static_cast<std::size_t>(n)]);
    VectorXd rho;
    if (opts.noiseless_measurements) {
      rho = measurement_function(truth, sats, lambda);
    } else {
      const MatrixXd info = measurement_information(truth, pointing, sats, config, shadow);
      rho = simulate_measurement(truth, sats, lambda, info, meas_rng);
    }
    state = ukf_update(
        pred, rho, [&](const VectorXd& z) { return measurement_function(z, sats, lambda); },
        [&](const SigmaSet& set) { return fim_noise(set, pointing, sats, config, cache); }, up);

    PositioningStep rec;
    rec.step = n;
    rec.pos_err = (state.mean.segment<3>(0) - truth.segment<3>(0)).norm();
    rec.vel_err = (state.mean.segment<3>(3) - truth.segment<3>(3)).norm();
    rec.bias_err = (state.mean.tail(S) - truth.tail(S)).norm();
    rec.trace_p = state.cov.trace();
    result.steps.push_back(rec);
    result.history.push_back(state);
    if (!(rec.pos_err <= config.positioning.divergence_ceiling)) {
      throw FilterDiverged("position error " + std::to_string(rec.pos_err) + " m at step " +
                           std::to_string(n));
    }
  }
  result.final_state = state;
  return result;
}

std::pair<double, double> rms_errors(const PositioningResult& r, std::size_t first) {
  double p2 = 0.0, v2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i < r.steps.size(); ++i, ++n) {
    p2 += r.steps[i].pos_err * r.steps[i].pos_err;
    v2 += r.steps[i].vel_err * r.steps[i].vel_err;
  }
  if (n == 0) return {0.0, 0.0};
  return {std::sqrt(p2 / n), std::sqrt(v2 / n)};
}

}  // namespace leoipac
