#pragma once

#include "sfc/geometry.hpp"
#include "sfc/seeker.hpp"

namespace sfc::stabilization {

using seeker::Vec5;

struct CompensatedObservation {
  double theta_u = 0.0;
  double theta_v = 0.0;
  Vec3 omega;
};

struct Compensation {
  CompensatedObservation obs;
  bool clamped = false;  // an estimate was outside +-max_abs_eps and was clipped
};

/// Divides each channel by (1 + eps_hat). Estimates beyond +-max_abs_eps are
/// clipped first; max_abs_eps must stay below 0.5.
Compensation compensate(const seeker::Observation& obs, const Vec5& eps_hat, double max_abs_eps = 0.1);

struct StabilizerState {
  Quat dq;  // attitude change since episode start, body relative to N'
};

/// RK4 step of the dq kinematics with the compensated rate held constant.
StabilizerState integrate_dq(const StabilizerState& s, const Vec3& omega, double dt);

/// RK4 step with the compensated rate interpolated linearly between samples.
StabilizerState integrate_dq(const StabilizerState& s, const Vec3& omega_prev, const Vec3& omega_now, double dt);

/// Attitude passed through the same first-order lag as the seeker angles, so that
/// stabilizing lagged angles with it does not turn body motion into false LOS motion.
Quat lag_attitude(const Quat& lagged, const Quat& current, double dt, double tau);

struct StabilizedAngles {
  double theta_u = 0.0;
  double theta_v = 0.0;
  Vec3 los;              // unit line of sight in N'
  bool clamped = false;  // sin^2 u + sin^2 v exceeded 1
};

/// Rebuilds the body line of sight from the two angles and rotates it into N'.
StabilizedAngles stabilize(double theta_u, double theta_v, const Quat& dq);

}  // namespace sfc::stabilization
