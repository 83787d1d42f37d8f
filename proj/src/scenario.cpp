#include "leoipac/scenario.hpp"

#include <algorithm>

#include "leoipac/errors.hpp"
#include "leoipac/rng.hpp"

namespace leoipac {

namespace {

constexpr double kDeg = kPi / 180.0;
// Passes of the default pattern are centred this long after the epoch.
constexpr double kPassCentre = 100.0;

double orbit_radius(const ScenarioConfig& c) {
  return c.scenario.earth_radius + c.scenario.orbit_altitude;
}

OrbitElements elements_from_pass(const Vec3& r_hat, const Vec3& dir, double mean_motion,
                                 double t_centre) {
  const Vec3 w = r_hat.cross(dir).normalized();
  OrbitElements e;
  e.inclination = std::acos(std::clamp(w.z(), -1.0, 1.0));
  e.raan = std::atan2(w.x(), -w.y());
  const Vec3 xo(std::cos(e.raan), std::sin(e.raan), 0.0);
  const Vec3 yo = w.cross(xo);
  const double u_centre = std::atan2(r_hat.dot(yo), r_hat.dot(xo));
  e.phase = u_centre - mean_motion * t_centre;
  return e;
}

}  // namespace

LocalFrame reference_frame(const ScenarioConfig& config) {
  const double lat = config.scenario.ref_latitude_deg * kDeg;
  const double lon = config.scenario.ref_longitude_deg * kDeg;
  LocalFrame f;
  f.up = Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  f.east = Vec3(-std::sin(lon), std::cos(lon), 0.0);
  f.north = Vec3(-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat));
  f.origin = config.scenario.earth_radius * f.up;
  return f;
}

std::vector<OrbitElements> constellation_elements(const ScenarioConfig& config) {
  const auto& sc = config.scenario;
  const int S = sc.num_satellites;
  std::vector<OrbitElements> out(static_cast<std::size_t>(S));
  if (!sc.sat_inclination_deg.empty() && !sc.sat_raan_deg.empty() && !sc.sat_phase_deg.empty()) {
    for (int s = 0; s < S; ++s) {
      const auto i = static_cast<std::size_t>(s);
      out[i] = {sc.sat_inclination_deg[i] * kDeg, sc.sat_raan_deg[i] * kDeg,
                sc.sat_phase_deg[i] * kDeg};
    }
    return out;
  }
  const LocalFrame f = reference_frame(config);
  const double R = orbit_radius(config);
  const double n = std::sqrt(kEarthMu / (R * R * R));
  for (int s = 0; s < S; ++s) {
    // Offset (central angle) and bearing of the pass centre from the
    // reference point, and heading of the ground track there.
    double gamma = 2.0 * kDeg, bearing = 0.0;
    if (s > 0) {
      gamma = (6.0 + 0.75 * s) * kDeg;
      bearing = (360.0 * (s - 1) / std::max(1, S - 1) + 20.0) * kDeg;
    }
    const double heading = (45.0 * s + 15.0) * kDeg;
    const Vec3 horiz = std::cos(bearing) * f.north + std::sin(bearing) * f.east;
    const Vec3 r_hat = (std::cos(gamma) * f.up + std::sin(gamma) * horiz).normalized();
    Vec3 dir = std::cos(heading) * f.north + std::sin(heading) * f.east;
    dir = (dir - dir.dot(r_hat) * r_hat).normalized();
    out[static_cast<std::size_t>(s)] = elements_from_pass(r_hat, dir, n, sc.epoch + kPassCentre);
  }
  return out;
}

std::vector<SatelliteState> propagate_constellation(const ScenarioConfig& config, double t) {
  const double R = orbit_radius(config);
  const double n = std::sqrt(kEarthMu / (R * R * R));
  const double speed = std::sqrt(kEarthMu / R);
  const auto elements = constellation_elements(config);
  std::vector<SatelliteState> sats;
  sats.reserve(elements.size());
  for (std::size_t s = 0; s < elements.size(); ++s) {
    const auto& e = elements[s];
    const Vec3 xo(std::cos(e.raan), std::sin(e.raan), 0.0);
    const Vec3 yo(-std::sin(e.raan) * std::cos(e.inclination),
                  std::cos(e.raan) * std::cos(e.inclination), std::sin(e.inclination));
    const double u = e.phase + n * t;
    SatelliteState st;
    st.id = static_cast<int>(s);
    st.position = R * (std::cos(u) * xo + std::sin(u) * yo);
    st.velocity = speed * (-std::sin(u) * xo + std::cos(u) * yo);
    sats.push_back(st);
  }
  return sats;
}

std::vector<UserTruth> propagate_kinematics(const Vec3& p0, const Vec3& v0,
                                            const std::vector<Vec3>& accel, double dt,
                                            const VectorXd& clock_biases) {
  std::vector<UserTruth> out;
  out.reserve(accel.size() + 1);
  UserTruth cur;
  cur.position = p0;
  cur.velocity = v0;
  cur.clock_biases = clock_biases;
  for (const Vec3& a : accel) {
    cur.acceleration = a;
    out.push_back(cur);
    UserTruth next;
    next.position = cur.position + cur.velocity * dt + 0.5 * dt * dt * a;
    next.velocity = cur.velocity + dt * a;
    next.clock_biases = clock_biases;
    cur = next;
  }
  out.push_back(cur);
  return out;
}

Trajectory generate_user_trajectory(const ScenarioConfig& config, int n_steps,
                                    std::uint64_t seed) {
  return generate_user_trajectory(config, n_steps, seed, reference_frame(config).origin);
}

Trajectory generate_user_trajectory(const ScenarioConfig& config, int n_steps,
                                    std::uint64_t seed, const Vec3& start) {
  if (n_steps < 1) throw ConfigError("trajectory needs at least one step");
  const auto& sc = config.scenario;
  const LocalFrame f = reference_frame(config);
  // Tangent plane at the start point.
  const Vec3 up = start.normalized();
  Vec3 east = f.east - f.east.dot(up) * up;
  if (east.norm() < 1e-9) east = Vec3::UnitY() - up.y() * up;
  east.normalize();
  const Vec3 north = up.cross(east);

  const double hdg = sc.ut_heading_deg * kDeg;
  const Vec3 along = std::cos(hdg) * east + std::sin(hdg) * north;
  const Vec3 across = up.cross(along);

  const double dt = sc.update_interval;
  const double omega = sc.ut_accel_period > 0 ? kTwoPi / sc.ut_accel_period : 0.0;
  std::vector<Vec3> accel(static_cast<std::size_t>(n_steps));
  for (int n = 0; n < n_steps; ++n) {
    accel[static_cast<std::size_t>(n)] = sc.ut_accel_amplitude * std::sin(omega * n * dt) * across;
  }

  RngStream bias_rng(derive_seed(seed, StreamPurpose::ClockBias));
  VectorXd biases(sc.num_satellites);
  for (Index s = 0; s < biases.size(); ++s) biases(s) = sc.clock_bias_std * bias_rng.normal();

  Trajectory traj;
  traj.truth = propagate_kinematics(start, sc.ut_speed * along, accel, dt, biases);

  Eigen::SelfAdjointEigenSolver<Mat3> es(sc.accel_noise_cov);
  const Mat3 sqrt_ca = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                       es.eigenvectors().transpose();
  RngStream imu(derive_seed(seed, StreamPurpose::ImuNoise));
  traj.measured_accel.reserve(accel.size());
  for (const Vec3& a : accel) {
    const Vec3 z(imu.normal(), imu.normal(), imu.normal());
    traj.measured_accel.push_back(a + sqrt_ca * z);
  }
  return traj;
}

double los_doppler(const Vec3& p_sat, const Vec3& v_sat, const Vec3& p_ut, const Vec3& v_ut,
                   double wavelength) {
  const Vec3 rel = p_ut - p_sat;
  return (v_sat - v_ut).dot(rel) / (wavelength * rel.norm());
}

LinkGeometry link_geometry(const SatelliteState& sat, const UserTruth& ut,
                           const ScenarioConfig& config, int s) {
  const Vec3 rel = ut.position - sat.position;
  const double d = rel.norm();
  if (d < 1.0) throw DegenerateGeometry("satellite and UT coincide");
  const Vec3 u = rel / d;
  const double elev = std::asin(std::clamp(-u.dot(ut.position.normalized()), -1.0, 1.0));
  if (!(elev > 0.0)) throw BelowHorizon("satellite " + std::to_string(s) + " is below the horizon");

  const Vec3 e_n = -sat.position.normalized();
  Vec3 e_h = sat.velocity - sat.velocity.dot(e_n) * e_n;
  if (e_h.norm() < 1e-12) e_h = e_n.unitOrthogonal();
  e_h.normalize();
  const Vec3 e_v = e_n.cross(e_h);

  const double lambda = config.wavelength();
  LinkGeometry g;
  g.distance = d;
  g.elevation = elev;
  g.aod_el = std::asin(std::clamp(u.dot(e_n), -1.0, 1.0));
  g.aod_az = std::atan2(u.dot(e_v), u.dot(e_h));
  const double bias = (s >= 0 && s < ut.clock_biases.size()) ? ut.clock_biases(s) : 0.0;
  g.los_delay = d / kSpeedOfLight + bias;
  g.los_doppler = (sat.velocity - ut.velocity).dot(u) / lambda;
  g.ut_doppler = -ut.velocity.dot(u) / lambda;
  return g;
}

std::vector<Vec3> ut_square_positions(const ScenarioConfig& config, int count, double side) {
  const LocalFrame f = reference_frame(config);
  const double Re = config.scenario.earth_radius;
  const double corner[4][2] = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) {
    const double ring = 1.0 + i / 4;
    const double e = corner[i % 4][0] * side * ring;
    const double n = corner[i % 4][1] * side * ring;
    // Project the tangent-plane offset back onto the sphere.
    out.push_back(Re * (f.origin + e * f.east + n * f.north).normalized());
  }
  return out;
}

}  // namespace leoipac
