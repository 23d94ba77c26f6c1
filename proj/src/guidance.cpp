#include "sfc/guidance.hpp"

#include <algorithm>
#include <cmath>

namespace sfc::guidance {

double closing_speed_estimate(double missile_speed, double target_speed) { return missile_speed + target_speed; }

void Policy::reset(double initial_range, double closing_speed, double mass, const dynamics::ThrusterTable& thrusters) {
  initial_range_ = initial_range;
  closing_speed_ = closing_speed;
  mass_ = mass;
  thrusters_ = thrusters;
  started_ = false;
  last_t_ = 0.0;
  filters_ = {};
  own_cmd_n_ = {};
  zem_ = {};
  zem_sigma_ = {};
}

int phase_plane(double error, double rate, double deadband, double lookahead, double rate_cap) {
  if (rate > rate_cap) return -1;
  if (rate < -rate_cap) return 1;
  const double predicted = error - rate * lookahead;
  if (predicted > deadband) return 1;
  if (predicted < -deadband) return -1;
  return 0;
}

double Policy::time_to_go(double t) const {
  return std::max(initial_range_ / closing_speed_ - t, cfg_.min_time_to_go);
}

void Policy::predict(AxisFilter& f, double dt, double commanded) const {
  // Own acceleration follows the command through a first-order lag; relative
  // acceleration is the target's minus that.
  const double tau = cfg_.thrust_tau;
  const double d = f.own_accel - commanded;
  double dv = commanded * dt, dp = 0.5 * commanded * dt * dt;
  if (tau > 0.0) {
    const double decay = 1.0 - std::exp(-dt / tau);
    dv += d * tau * decay;
    dp += d * tau * (dt - tau * decay);
    f.own_accel = commanded + d * (1.0 - decay);
  } else {
    f.own_accel = commanded;
  }
  f.x = {f.x.x + f.x.y * dt + 0.5 * f.x.z * dt * dt - dp, f.x.y + f.x.z * dt - dv, f.x.z};

  Mat3 phi = Mat3::identity();
  phi(0, 1) = dt;
  phi(0, 2) = 0.5 * dt * dt;
  phi(1, 2) = dt;
  const double q = cfg_.jerk_noise * cfg_.jerk_noise;
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  Mat3 qm;
  qm(0, 0) = q * dt3 * dt2 / 20.0;
  qm(0, 1) = qm(1, 0) = q * dt2 * dt2 / 8.0;
  qm(0, 2) = qm(2, 0) = q * dt3 / 6.0;
  qm(1, 1) = q * dt3 / 3.0;
  qm(1, 2) = qm(2, 1) = q * dt2 / 2.0;
  qm(2, 2) = q * dt;
  const Mat3 pp = phi * f.p * phi.transposed();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.p(i, j) = pp(i, j) + qm(i, j);
}

void Policy::observe(double t, double theta_u_stab, double theta_v_stab) {
  const double range = std::max(closing_speed_ * time_to_go(t), 1.0);
  const double r_meas = std::pow(range * cfg_.los_noise, 2);
  const double measured[2] = {range * std::tan(theta_u_stab), range * std::tan(theta_v_stab)};
  const double dt = started_ ? t - last_t_ : 0.0;
  for (int a = 0; a < 2; ++a) {
    AxisFilter& f = filters_[a];
    if (!started_) {
      f = AxisFilter{};
      f.x.x = measured[a];
      f.p = Mat3::diag(r_meas, cfg_.initial_rate_sigma * cfg_.initial_rate_sigma,
                       cfg_.initial_accel_sigma * cfg_.initial_accel_sigma);
      continue;
    }
    if (dt > 0.0) predict(f, dt, own_cmd_n_[a]);
    // Scalar position measurement: H = (1, 0, 0).
    const double s = f.p(0, 0) + r_meas;
    const Vec3 k{f.p(0, 0) / s, f.p(1, 0) / s, f.p(2, 0) / s};
    const double innov = measured[a] - f.x.x;
    f.x += k * innov;
    const Vec3 row{f.p(0, 0), f.p(0, 1), f.p(0, 2)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f.p(i, j) -= k[i] * row[j];
  }
  started_ = true;
  last_t_ = t;
}

dynamics::ThrusterCommand Policy::command(const GuidanceInput& in, double dt) {
  dynamics::ThrusterCommand cmd;
  if (!started_) return cmd;
  // Bring the filters up to the decision time before extrapolating.
  if (in.t > last_t_) {
    for (int a = 0; a < 2; ++a) predict(filters_[a], in.t - last_t_, own_cmd_n_[a]);
    last_t_ = in.t;
  }
  const double tgo = time_to_go(in.t);
  for (int a = 0; a < 2; ++a) {
    const AxisFilter& f = filters_[a];
    const Vec3 g{1.0, tgo, 0.5 * tgo * tgo};
    zem_[a] = dot(g, f.x) - f.own_accel * cfg_.thrust_tau * tgo;
    zem_sigma_[a] = std::sqrt(std::max(dot(g, f.p * g), 0.0));
  }

  // Final-position shift produced by one lagged divert pulse fired now.
  const double divert_accel = thrusters_[kDivertPosY].thrust / mass_;
  const double lever = std::max(tgo - 0.5 * dt - cfg_.thrust_tau, 0.0);
  const double effect = divert_accel * dt * lever;
  // Waiting for a better estimate only pays while there is time left to act on it.
  const double margin =
      cfg_.divert_margin * std::clamp((tgo - cfg_.margin_fade_end) / cfg_.margin_fade_length, 0.0, 1.0);
  const Mat3 c_bn = dcm_from_quat(in.dq);
  const Vec3 zem_body = c_bn * Vec3{0.0, zem_[0], zem_[1]};
  const Vec3 sigma_body = c_bn * Vec3{0.0, zem_sigma_[0], zem_sigma_[1]};
  const int pos_thruster[2] = {kDivertPosY, kDivertPosZ};
  const int neg_thruster[2] = {kDivertNegY, kDivertNegZ};
  Vec3 fired_body;
  for (int a = 0; a < 2; ++a) {
    // Relative position shrinks when the missile thrusts toward the target offset.
    const double z = a == 0 ? zem_body.y : zem_body.z;
    const double sig = std::fabs(a == 0 ? sigma_body.y : sigma_body.z);
    double sign = 0.0;
    if (effect > 0.0 && std::fabs(z) > 0.5 * effect + margin * sig) sign = z > 0.0 ? 1.0 : -1.0;
    if (sign > 0.0) cmd.set(pos_thruster[a]);
    if (sign < 0.0) cmd.set(neg_thruster[a]);
    (a == 0 ? fired_body.y : fired_body.z) = sign * divert_accel;
  }
  const Vec3 fired_n = c_bn.transposed() * fired_body;
  own_cmd_n_ = {fired_n.y, fired_n.z};

  // Attitude: point the boresight at the line of sight, hold roll near zero.
  auto fire_pair = [&](TorquePair p) {
    cmd.set(p.a);
    cmd.set(p.b);
  };
  const double roll = 2.0 * std::copysign(1.0, in.dq.w) * in.dq.x;
  const int yaw = phase_plane(in.theta_u_body, in.omega.z, cfg_.pointing_deadband, cfg_.pointing_lookahead,
                              cfg_.pointing_rate_cap);
  const int pitch = phase_plane(-in.theta_v_body, in.omega.y, cfg_.pointing_deadband, cfg_.pointing_lookahead,
                                cfg_.pointing_rate_cap);
  const int rollc = phase_plane(-roll, in.omega.x, cfg_.roll_deadband, cfg_.roll_lookahead, cfg_.roll_rate_cap);
  if (yaw > 0) fire_pair(kYawPos);
  if (yaw < 0) fire_pair(kYawNeg);
  if (pitch > 0) fire_pair(kPitchPos);
  if (pitch < 0) fire_pair(kPitchNeg);
  if (rollc > 0) fire_pair(kRollPos);
  if (rollc < 0) fire_pair(kRollNeg);
  return account_fuel(cmd, dt);
}

dynamics::ThrusterCommand Policy::account_fuel(const dynamics::ThrusterCommand& cmd, double dt) {
  double thrust = 0.0;
  for (int i = 0; i < dynamics::kThrusterCount; ++i)
    if (cmd.test(i)) thrust += thrusters_[i].thrust;
  mass_ -= thrust * dt / (cfg_.isp * dynamics::kGRef);
  return cmd;
}

dynamics::ThrusterCommand Policy::step(const GuidanceInput& in, double dt) {
  observe(in.t, in.theta_u_stab, in.theta_v_stab);
  return command(in, dt);
}

}  // namespace sfc::guidance
