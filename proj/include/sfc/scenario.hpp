#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "sfc/dynamics.hpp"
#include "sfc/random.hpp"

namespace sfc::scenario {

inline constexpr double kDeg = 3.14159265358979323846 / 180.0;

struct ScenarioConfig {
  double range_min = 50e3;  // m
  double range_max = 55e3;
  double missile_speed = 3000.0;  // m/s
  double target_speed = 4000.0;
  double polar_min = 80.0 * kDeg;  // target position polar angle from +z
  double polar_max = 100.0 * kDeg;
  double azimuth_max = 10.0 * kDeg;
  double target_heading_max = 10.0 * kDeg;  // azimuth and elevation offsets from head-on
  double heading_error_max = 5.0 * kDeg;
  double attitude_error_max = 5.0 * kDeg;
  double target_accel_max = 5.0 * 9.81;  // m/s^2
  bool maneuvers = true;
  double bang_duration_min = 1.0, bang_duration_max = 4.0;  // s
  double bang_start_min = 0.0, bang_start_max = 6.0;
  double weave_period_min = 1.0, weave_period_max = 5.0;
  double weave_offset_min = 1.0, weave_offset_max = 5.0;
  double com_shift_max = 0.025;  // fraction of half-length (x) or radius (y, z)
  int shooting_iterations = 12;
};

enum class Maneuver { None, BangBang, Weave };
std::string_view maneuver_name(Maneuver m);

struct ScenarioDraw {
  double range = 0.0;
  double polar = 0.0;
  double azimuth = 0.0;
  double heading_az = 0.0;      // target velocity offsets from head-on
  double heading_el = 0.0;
  double heading_error = 0.0;   // missile velocity error magnitude and direction
  double heading_error_dir = 0.0;
  double attitude_error = 0.0;  // boresight pointing error magnitude and direction
  double attitude_error_dir = 0.0;
  Maneuver maneuver = Maneuver::None;
  double accel = 0.0;           // m/s^2
  double accel_dir = 0.0;       // bang-bang direction in the plane normal to the target velocity
  double bang_duration = 1.0;
  double bang_start = 0.0;
  double weave_period = 1.0;
  double weave_offset = 0.0;
  Vec3 com_shift;               // fractional final center-of-mass shift per axis
};

ScenarioDraw sample_scenario(const ScenarioConfig& cfg, Rng& rng);

/// Target acceleration command, always orthogonal to the target velocity.
Vec3 target_accel_command(const ScenarioDraw& d, double t, const Vec3& v_target);

struct Engagement {
  dynamics::MissileState missile;
  dynamics::TargetState target;
  Vec3 r_com_final;          // body frame, m
  double predicted_miss = 0.0;  // coasting miss after the collision-course solve
  double time_to_intercept = 0.0;
};

/// Puts the missile on a gravity-corrected collision course, then applies the drawn
/// heading and attitude errors. Returns nullopt if no collision triangle exists.
std::optional<Engagement> init_engagement(const ScenarioDraw& d, const ScenarioConfig& cfg,
                                          const dynamics::MissileConfig& missile, const dynamics::GravityModel& gravity);

/// Attitude with the boresight along `los` and body z as close to +z as possible.
Quat pointing_attitude(const Vec3& los);

/// Tracks |r_rel|^2 samples and reports the closest approach once range starts opening.
class ClosestApproach {
 public:
  void reset() { count_ = 0; }
  /// Returns true once the closest approach lies inside the retained samples.
  bool add(double t, const Vec3& rel_position, const Vec3& rel_velocity);
  double miss() const { return miss_; }
  double time() const { return t_star_; }

 private:
  std::array<double, 3> t_{};
  std::array<double, 3> f_{};
  int count_ = 0;
  double miss_ = 0.0;
  double t_star_ = 0.0;
};

/// Minimum of the parabola through three samples, clipped to the sampled interval.
std::pair<double, double> parabola_minimum(const std::array<double, 3>& t, const std::array<double, 3>& f);

enum class Termination { None, Completed, FieldOfView, RateLimit, FuelExhausted, Timeout, Fault };
std::string_view termination_name(Termination t);
bool is_violation(Termination t);

struct TerminationInputs {
  bool fov_exceeded = false;
  Vec3 omega;
  double mass = 50.0;
  bool closest_approach_passed = false;
  bool finite = true;
  double t = 0.0;
};

struct TerminationLimits {
  double omega_max = 12.0;  // rad/s, any body component
  double dry_mass = 25.0;
  double max_time = 30.0;
};

/// First triggered condition, checked in the order: numerical fault, field of view,
/// rate limit, fuel, closest approach, timeout.
Termination check_termination(const TerminationInputs& in, const TerminationLimits& lim);

}  // namespace sfc::scenario
