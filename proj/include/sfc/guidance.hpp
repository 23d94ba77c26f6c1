#pragma once

#include <array>

#include "sfc/dynamics.hpp"
#include "sfc/geometry.hpp"

namespace sfc::guidance {

// Thruster indices (0-based) grouped by effect. Pairs are derived from the
// body-frame thruster geometry, not from thruster numbering.
inline constexpr int kDivertNegY = 0;
inline constexpr int kDivertPosY = 1;
inline constexpr int kDivertPosZ = 2;
inline constexpr int kDivertNegZ = 3;

struct TorquePair {
  int a;
  int b;
};
inline constexpr TorquePair kRollNeg{4, 5};
inline constexpr TorquePair kRollPos{6, 7};
inline constexpr TorquePair kPitchPos{8, 9};
inline constexpr TorquePair kPitchNeg{10, 11};
inline constexpr TorquePair kYawNeg{12, 13};
inline constexpr TorquePair kYawPos{14, 15};

enum class ClosingSpeedSource {
  Nominal,     // sum of the configured speed magnitudes (exact only head-on)
  LaunchCue,   // closing speed of the actual launch geometry, as a fire-control handoff
};

struct GuidanceConfig {
  ClosingSpeedSource closing_speed_source = ClosingSpeedSource::LaunchCue;
  double thrust_tau = 0.020;       // s, expected divert thrust lag
  // Kalman filter on lateral relative motion, one per stabilized axis.
  double los_noise = 1e-3;            // rad, effective angle measurement noise
  double jerk_noise = 5.0;           // m/s^3/sqrt(Hz), target acceleration random walk
  double initial_rate_sigma = 300.0;  // m/s
  double initial_accel_sigma = 30.0;  // m/s^2
  double min_time_to_go = 0.02;    // s
  // A divert pulse fires when it is predicted to shrink the zero-effort miss, with
  // a margin of `divert_margin` standard deviations of the miss estimate.
  double divert_margin = 1.0;
  double margin_fade_end = 0.3;     // s of time-to-go where the margin reaches zero
  double margin_fade_length = 1.0;  // s over which it fades
  double isp = 250.0;              // s, for the onboard mass estimate
  // Phase-plane attitude control per axis: fire when the error predicted `lookahead`
  // seconds ahead leaves the deadband, or when the rate exceeds its cap.
  double pointing_deadband = 0.35;  // rad, pitch/yaw boresight error
  double pointing_lookahead = 0.25; // s
  double pointing_rate_cap = 1.5;   // rad/s
  double roll_deadband = 0.3;       // rad, roll angle since launch
  double roll_lookahead = 0.8;      // s
  double roll_rate_cap = 1.0;       // rad/s
};

/// One phase-plane decision: +1 for positive torque, -1 for negative, 0 for none.
/// `error` shrinks at `rate` (d error/dt = -rate).
int phase_plane(double error, double rate, double deadband, double lookahead, double rate_cap);

/// Nominal closing speed for a head-on engagement.
double closing_speed_estimate(double missile_speed, double target_speed);

/// What the flight computer hands the policy every guidance step.
struct GuidanceInput {
  double t = 0.0;
  double theta_u_stab = 0.0;  // stabilized angles, N'
  double theta_v_stab = 0.0;
  double theta_u_body = 0.0;  // compensated body angles
  double theta_v_body = 0.0;
  Vec3 omega;                 // compensated body rate
  Quat dq;                    // estimated attitude change since episode start
};

/// Lateral relative motion along one stabilized axis: position, velocity and the
/// target's acceleration, with covariance.
struct AxisFilter {
  Vec3 x;    // (y, ydot, target accel): m, m/s, m/s^2
  Mat3 p;
  double own_accel = 0.0;  // lagged own divert acceleration, m/s^2
};

/// Predictive on/off divert guidance on a per-axis Kalman filter, plus phase-plane
/// attitude control. Episode-local; reset() per episode.
class Policy {
 public:
  explicit Policy(const GuidanceConfig& cfg = {}) : cfg_(cfg) {}

  /// `initial_range` and `closing_speed` are the launch cue.
  void reset(double initial_range, double closing_speed, double mass, const dynamics::ThrusterTable& thrusters);

  /// Feeds one stabilized line-of-sight sample to the filters.
  void observe(double t, double theta_u_stab, double theta_v_stab);

  /// Chooses thrusters for the next `dt` seconds.
  dynamics::ThrusterCommand command(const GuidanceInput& in, double dt);

  /// observe() followed by command().
  dynamics::ThrusterCommand step(const GuidanceInput& in, double dt);

  double time_to_go(double t) const;
  const AxisFilter& filter(int axis) const { return filters_[axis]; }
  /// Zero-effort miss and its standard deviation at the last command, N' (y, z).
  std::array<double, 2> last_zem() const { return zem_; }
  std::array<double, 2> last_zem_sigma() const { return zem_sigma_; }
  double mass_estimate() const { return mass_; }

 private:
  void predict(AxisFilter& f, double dt, double commanded) const;
  dynamics::ThrusterCommand account_fuel(const dynamics::ThrusterCommand& cmd, double dt);

  GuidanceConfig cfg_;
  double initial_range_ = 0.0;
  double closing_speed_ = 7000.0;
  double mass_ = 50.0;
  dynamics::ThrusterTable thrusters_{};
  bool started_ = false;
  double last_t_ = 0.0;
  std::array<AxisFilter, 2> filters_{};
  std::array<double, 2> own_cmd_n_{};    // commanded divert acceleration, N' (y, z)
  std::array<double, 2> zem_{};
  std::array<double, 2> zem_sigma_{};
};

}  // namespace sfc::guidance
