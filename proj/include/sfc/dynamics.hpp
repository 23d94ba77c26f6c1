#pragma once

#include <array>
#include <bitset>
#include <functional>

#include "sfc/geometry.hpp"

namespace sfc::dynamics {

inline constexpr int kThrusterCount = 16;
inline constexpr double kGRef = 9.81;

/// On/off state of the 16 thrusters; bit i is thruster i+1 in the body-frame table.
using ThrusterCommand = std::bitset<kThrusterCount>;

struct ThrusterSpec {
  Vec3 direction;  // unit force direction, body frame
  Vec3 position;   // application point relative to the body centroid, m
  double thrust;   // N
};

using ThrusterTable = std::array<ThrusterSpec, kThrusterCount>;

/// Four 5000 N divert thrusters followed by twelve paired 125 N attitude thrusters.
const ThrusterTable& default_thrusters();

struct MissileConfig {
  double height = 1.0;  // m, cylinder along body x
  double radius = 0.25;
  double wet_mass = 50.0;  // kg
  double dry_mass = 25.0;
  double isp = 250.0;           // s
  double thrust_tau = 0.020;    // s, ignition lag
  double fuel_capacity() const { return wet_mass - dry_mass; }
};

/// Solid-cylinder inertia tensor at mass `m`, principal axes on the body axes.
Mat3 inertia_tensor(double mass, const MissileConfig& cfg);

/// Time derivative of inertia_tensor for a mass rate `mdot`.
Mat3 inertia_rate(double mass_rate, const MissileConfig& cfg);

/// Center of mass drifting linearly from the nominal origin toward `r_com_final`
/// as fuel is used.
Vec3 center_of_mass(const Vec3& r_com_final, double fuel_used, double fuel_capacity);

struct Wrench {
  Vec3 force;              // N, body
  Vec3 torque;             // N m, body, about r_com
  double thrust_sum = 0.0;  // sum of individual thrust magnitudes, N
};

Wrench thruster_wrench(const ThrusterCommand& cmd, const ThrusterTable& table, const Vec3& r_com);

enum class GravityMode { Off, Uniform, PointMass };

struct GravityModel {
  GravityMode mode = GravityMode::PointMass;
  double mu = 3.986004418e14;       // m^3/s^2
  double earth_radius = 6.371e6;    // m
  double altitude = 200e3;          // m, engagement-frame origin above the surface
  double uniform_g = 9.81;          // m/s^2 along -z in Uniform mode

  /// Engagement frame: origin at `altitude` above the surface, +z radially up.
  Vec3 acceleration(const Vec3& r) const;
};

struct MissileState {
  Vec3 r;          // m
  Vec3 v;          // m/s
  Quat q;          // body relative to engagement frame
  Vec3 omega;      // rad/s, body
  double mass = 50.0;
  Vec3 force;      // lagged body force, N
  Vec3 torque;     // lagged body torque about r_com, N m
  double thrust_sum = 0.0;  // lagged total thrust magnitude, N
  Vec3 r_com;      // current center of mass, body
};

struct TargetState {
  Vec3 r;
  Vec3 v;
};

// Individual integrator pieces. Each is one RK4 step of its own sub-system.

std::pair<Vec3, Vec3> lag_step(const Vec3& force, const Vec3& torque, const Vec3& force_cmd, const Vec3& torque_cmd,
                               double tau, double dt);

Vec3 euler_rotation_step(const Vec3& omega, const Mat3& inertia, const Mat3& inertia_dot, const Vec3& torque,
                         double dt);

/// RK4 step of the quaternion kinematics at constant body rate, renormalized.
Quat quaternion_step(const Quat& q, const Vec3& omega, double dt);

/// RK4 step with body rate varying linearly from `omega0` to `omega1` over the step.
Quat quaternion_step(const Quat& q, const Vec3& omega0, const Vec3& omega1, double dt);

struct TranslationalResult {
  Vec3 r;
  Vec3 v;
  double mass;
  bool fuel_exhausted;
};

TranslationalResult translational_step(const Vec3& r, const Vec3& v, double mass, const Vec3& force_body,
                                       double thrust_sum, const Quat& q, const GravityModel& gravity, double isp,
                                       double dry_mass, double dt);

using TargetAccel = std::function<Vec3(double t, const Vec3& v)>;

TargetState target_step(const TargetState& target, const Vec3& accel_cmd, const GravityModel& gravity, double dt);
TargetState target_step(const TargetState& target, const TargetAccel& accel, double t, const GravityModel& gravity,
                        double dt);

/// Coupled RK4 step of the full missile state under a held thruster command.
/// Thrust lag is integrated in closed form; torques use the center of mass at each stage.
/// Returns true when the step ends at or below the dry mass.
bool missile_step(MissileState& s, const ThrusterCommand& cmd, const ThrusterTable& table, const Vec3& r_com_final,
                  const MissileConfig& cfg, const GravityModel& gravity, double dt);

}  // namespace sfc::dynamics
