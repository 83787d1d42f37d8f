#pragma once

#include <cstdint>
#include <vector>

#include "leoipac/config.hpp"
#include "leoipac/types.hpp"

namespace leoipac {

struct SatelliteState {
  int id = 0;
  Vec3 position = Vec3::Zero();  // m, Earth-centered fixed frame
  Vec3 velocity = Vec3::Zero();  // m/s
};

struct UserTruth {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();  // applied from this step to the next
  VectorXd clock_biases;             // s, one per satellite
};

struct Trajectory {
  std::vector<UserTruth> truth;      // n_steps + 1 states, index 0 is the start
  std::vector<Vec3> measured_accel;  // n_steps IMU readings
};

struct LinkGeometry {
  double distance = 0.0;     // m
  double elevation = 0.0;    // rad, satellite elevation seen from the UT
  double aod_az = 0.0;       // rad, in the satellite array frame
  double aod_el = 0.0;       // rad, pi/2 is boresight (nadir)
  double los_delay = 0.0;    // s, includes the clock bias
  double los_doppler = 0.0;  // Hz
  double ut_doppler = 0.0;   // Hz, the part caused by UT motion alone
};

struct OrbitElements {
  double inclination = 0.0;  // rad
  double raan = 0.0;         // rad
  double phase = 0.0;        // rad, argument of latitude at t = 0
};

/// Reference point on the surface and its local east/north/up axes.
struct LocalFrame {
  Vec3 origin;
  Vec3 east;
  Vec3 north;
  Vec3 up;
};

LocalFrame reference_frame(const ScenarioConfig& config);

/// Elements used for each satellite: the configured lists when present,
/// otherwise a pattern whose passes are centred on the reference point at
/// epoch + 100 s.
std::vector<OrbitElements> constellation_elements(const ScenarioConfig& config);

std::vector<SatelliteState> propagate_constellation(const ScenarioConfig& config, double t);

/// Kinematic recursion p' = p + v dt + a dt^2 / 2, v' = v + a dt.
std::vector<UserTruth> propagate_kinematics(const Vec3& p0, const Vec3& v0,
                                            const std::vector<Vec3>& accel, double dt,
                                            const VectorXd& clock_biases);

Trajectory generate_user_trajectory(const ScenarioConfig& config, int n_steps,
                                    std::uint64_t seed);
Trajectory generate_user_trajectory(const ScenarioConfig& config, int n_steps,
                                    std::uint64_t seed, const Vec3& start);

double los_doppler(const Vec3& p_sat, const Vec3& v_sat, const Vec3& p_ut, const Vec3& v_ut,
                   double wavelength);

/// Throws BelowHorizon when the satellite elevation is not positive.
LinkGeometry link_geometry(const SatelliteState& sat, const UserTruth& ut,
                           const ScenarioConfig& config, int s);

/// Corners of a square of side `side` centred on the reference point, in
/// the local tangent plane. Returns `count` positions (count <= 4 uses the
/// first corners; more wrap onto a larger square).
std::vector<Vec3> ut_square_positions(const ScenarioConfig& config, int count, double side);

}  // namespace leoipac
