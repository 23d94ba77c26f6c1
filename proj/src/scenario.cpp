#include "sfc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sfc::scenario {

std::string_view maneuver_name(Maneuver m) {
  switch (m) {
    case Maneuver::None: return "none";
    case Maneuver::BangBang: return "bang-bang";
    case Maneuver::Weave: return "vertical-s";
  }
  return "?";
}

ScenarioDraw sample_scenario(const ScenarioConfig& cfg, Rng& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ScenarioDraw d;
  d.range = rng.uniform(cfg.range_min, cfg.range_max);
  d.polar = rng.uniform(cfg.polar_min, cfg.polar_max);
  d.azimuth = rng.uniform(-cfg.azimuth_max, cfg.azimuth_max);
  d.heading_az = rng.uniform(-cfg.target_heading_max, cfg.target_heading_max);
  d.heading_el = rng.uniform(-cfg.target_heading_max, cfg.target_heading_max);
  d.heading_error = rng.uniform(0.0, cfg.heading_error_max);
  d.heading_error_dir = rng.uniform(0.0, two_pi);
  d.attitude_error = rng.uniform(0.0, cfg.attitude_error_max);
  d.attitude_error_dir = rng.uniform(0.0, two_pi);
  // Maneuver parameters are always drawn so the stream layout does not depend on flags.
  const bool bang = rng.uniform() < 0.5;
  d.accel = rng.uniform(0.0, cfg.target_accel_max);
  d.accel_dir = rng.uniform(0.0, two_pi);
  d.bang_duration = rng.uniform(cfg.bang_duration_min, cfg.bang_duration_max);
  d.bang_start = rng.uniform(cfg.bang_start_min, cfg.bang_start_max);
  d.weave_period = rng.uniform(cfg.weave_period_min, cfg.weave_period_max);
  d.weave_offset = rng.uniform(cfg.weave_offset_min, cfg.weave_offset_max);
  d.maneuver = cfg.maneuvers ? (bang ? Maneuver::BangBang : Maneuver::Weave) : Maneuver::None;
  d.com_shift.x = rng.uniform(-cfg.com_shift_max, cfg.com_shift_max);
  d.com_shift.y = rng.uniform(-cfg.com_shift_max, cfg.com_shift_max);
  d.com_shift.z = rng.uniform(-cfg.com_shift_max, cfg.com_shift_max);
  return d;
}

namespace {

// Two unit vectors spanning the plane normal to `v`: the first horizontal, the
// second in the vertical plane containing `v`.
std::pair<Vec3, Vec3> normal_basis(const Vec3& v) {
  const Vec3 f = normalized(v);
  Vec3 h = cross(Vec3{0.0, 0.0, 1.0}, f);
  if (norm(h) < 1e-9) h = cross(Vec3{1.0, 0.0, 0.0}, f);
  h = normalized(h);
  return {h, cross(f, h)};
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  const Vec3 k = normalized(axis);
  return v * std::cos(angle) + cross(k, v) * std::sin(angle) + k * (dot(k, v) * (1.0 - std::cos(angle)));
}

// Direction `dir` tilted by `angle` toward the normal-plane direction at `azimuth`.
Vec3 tilt(const Vec3& dir, double angle, double azimuth) {
  const auto [e1, e2] = normal_basis(dir);
  const Vec3 axis = cross(normalized(dir), e1 * std::cos(azimuth) + e2 * std::sin(azimuth));
  return rotate_about(dir, axis, angle);
}

struct CoastResult {
  Vec3 miss_vector;  // target minus missile at closest approach
  double t = 0.0;
  bool found = false;
};

CoastResult coast(const Vec3& r_t, const Vec3& v_t, const Vec3& v_m, const dynamics::GravityModel& gravity,
                  double t_max) {
  constexpr double dt = 0.02;
  dynamics::TargetState m{{0.0, 0.0, 0.0}, v_m};
  dynamics::TargetState tg{r_t, v_t};
  ClosestApproach ca;
  double t = 0.0;
  const Vec3 zero;
  ca.add(t, tg.r - m.r, tg.v - m.v);
  Vec3 prev_rel = tg.r - m.r, prev_vrel = tg.v - m.v;
  double prev_t = t;
  while (t < t_max) {
    m = dynamics::target_step(m, zero, gravity, dt);
    tg = dynamics::target_step(tg, zero, gravity, dt);
    t += dt;
    const Vec3 rel = tg.r - m.r;
    const Vec3 vrel = tg.v - m.v;
    if (ca.add(t, rel, vrel)) {
      // Relative motion is nearly linear over one step; extrapolate from the nearer sample.
      const bool use_prev = std::fabs(ca.time() - prev_t) < std::fabs(ca.time() - t);
      const Vec3& base = use_prev ? prev_rel : rel;
      const Vec3& vb = use_prev ? prev_vrel : vrel;
      const double tb = use_prev ? prev_t : t;
      return {base + vb * (ca.time() - tb), ca.time(), true};
    }
    prev_rel = rel;
    prev_vrel = vrel;
    prev_t = t;
  }
  return {};
}

}  // namespace

Vec3 target_accel_command(const ScenarioDraw& d, double t, const Vec3& v_target) {
  if (d.maneuver == Maneuver::None || norm(v_target) == 0.0) return {};
  const auto [e1, e2] = normal_basis(v_target);
  if (d.maneuver == Maneuver::BangBang) {
    if (t < d.bang_start) return {};
    const long half_cycles = static_cast<long>(std::floor((t - d.bang_start) / d.bang_duration));
    const double sign = (half_cycles % 2 == 0) ? 1.0 : -1.0;
    return (e1 * std::cos(d.accel_dir) + e2 * std::sin(d.accel_dir)) * (sign * d.accel);
  }
  const double phase = 2.0 * std::numbers::pi * (t + d.weave_offset) / d.weave_period;
  return e2 * (d.accel * std::sin(phase));
}

Quat pointing_attitude(const Vec3& los) {
  const Vec3 x = normalized(los);
  Vec3 y = cross(Vec3{0.0, 0.0, 1.0}, x);
  if (norm(y) < 1e-9) y = cross(Vec3{1.0, 0.0, 0.0}, x);
  y = normalized(y);
  const Vec3 z = cross(x, y);
  Mat3 c;
  for (int j = 0; j < 3; ++j) {
    c(0, j) = x[j];
    c(1, j) = y[j];
    c(2, j) = z[j];
  }
  return quat_from_dcm(c);
}

std::optional<Engagement> init_engagement(const ScenarioDraw& d, const ScenarioConfig& cfg,
                                          const dynamics::MissileConfig& missile,
                                          const dynamics::GravityModel& gravity) {
  const Vec3 r_t = Vec3{std::sin(d.polar) * std::cos(d.azimuth), std::sin(d.polar) * std::sin(d.azimuth),
                        std::cos(d.polar)} *
                   d.range;
  // Target heads back along the line of sight, offset in azimuth and elevation.
  const Vec3 back = -normalized(r_t);
  const double az = std::atan2(back.y, back.x) + d.heading_az;
  const double el = std::asin(std::clamp(back.z, -1.0, 1.0)) + d.heading_el;
  const Vec3 v_t = Vec3{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)} * cfg.target_speed;

  // Straight-line collision triangle: |r_t + v_t t| = V_m t.
  const double vm = cfg.missile_speed;
  const double qa = dot(v_t, v_t) - vm * vm;
  const double qb = 2.0 * dot(r_t, v_t);
  const double qc = dot(r_t, r_t);
  double t_hit = -1.0;
  if (std::fabs(qa) < 1e-12) {
    if (qb < 0.0) t_hit = -qc / qb;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      const double t1 = (-qb - s) / (2.0 * qa);
      const double t2 = (-qb + s) / (2.0 * qa);
      const double lo = std::min(t1, t2), hi = std::max(t1, t2);
      t_hit = lo > 0.0 ? lo : hi;
    }
  }
  if (!(t_hit > 0.0)) return std::nullopt;

  Vec3 v_m = normalized(r_t + v_t * t_hit) * vm;
  Engagement e;
  e.time_to_intercept = t_hit;
  if (gravity.mode != dynamics::GravityMode::Off) {
    for (int it = 0; it < cfg.shooting_iterations; ++it) {
      const CoastResult c = coast(r_t, v_t, v_m, gravity, 2.0 * t_hit + 1.0);
      if (!c.found) return std::nullopt;
      e.time_to_intercept = c.t;
      if (norm(c.miss_vector) < 1e-6) break;
      v_m = normalized(v_m + c.miss_vector / c.t) * vm;
    }
  }
  const CoastResult check = coast(r_t, v_t, v_m, gravity, 2.0 * t_hit + 1.0);
  e.predicted_miss = check.found ? norm(check.miss_vector) : -1.0;

  e.missile.r = {};
  e.missile.v = tilt(v_m, d.heading_error, d.heading_error_dir);
  const Quat nominal = pointing_attitude(r_t);
  const Mat3 c_nom = dcm_from_quat(nominal);
  const Vec3 body_axis{0.0, std::cos(d.attitude_error_dir), std::sin(d.attitude_error_dir)};
  const Mat3 c_err = dcm_from_quat(quat_from_axis_angle(body_axis, d.attitude_error));
  e.missile.q = quat_from_dcm(c_err * c_nom);
  e.missile.mass = missile.wet_mass;
  e.missile.omega = {};
  e.missile.r_com = {};
  e.target = {r_t, v_t};
  e.r_com_final = {d.com_shift.x * 0.5 * missile.height, d.com_shift.y * missile.radius,
                   d.com_shift.z * missile.radius};
  return e;
}

std::pair<double, double> parabola_minimum(const std::array<double, 3>& t, const std::array<double, 3>& f) {
  // Newton divided differences.
  const double d01 = (f[1] - f[0]) / (t[1] - t[0]);
  const double d12 = (f[2] - f[1]) / (t[2] - t[1]);
  const double a = (d12 - d01) / (t[2] - t[0]);
  auto eval = [&](double x) { return f[0] + d01 * (x - t[0]) + a * (x - t[0]) * (x - t[1]); };
  double best_t = t[0], best_f = f[0];
  for (int i = 1; i < 3; ++i)
    if (f[i] < best_f) best_t = t[i], best_f = f[i];
  if (a > 0.0) {
    // f' = d01 + a (2x - t0 - t1) = 0.
    const double x = std::clamp((a * (t[0] + t[1]) - d01) / (2.0 * a), t[0], t[2]);
    const double fx = eval(x);
    if (fx < best_f) best_t = x, best_f = fx;
  }
  return {best_t, best_f};
}

bool ClosestApproach::add(double t, const Vec3& rel_position, const Vec3& rel_velocity) {
  const double f = dot(rel_position, rel_position);
  if (count_ < 3) {
    t_[count_] = t;
    f_[count_] = f;
    ++count_;
  } else {
    t_ = {t_[1], t_[2], t};
    f_ = {f_[1], f_[2], f};
  }
  if (count_ < 2 || dot(rel_position, rel_velocity) < 0.0) return false;
  if (count_ == 2) {
    // Opening from the first sample: closest approach at the earlier one.
    t_star_ = t_[0];
    miss_ = std::sqrt(f_[0]);
    return true;
  }
  const auto [ts, fs] = parabola_minimum(t_, f_);
  t_star_ = ts;
  miss_ = std::sqrt(std::max(fs, 0.0));
  return true;
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Completed: return "completed";
    case Termination::FieldOfView: return "fov";
    case Termination::RateLimit: return "rate_limit";
    case Termination::FuelExhausted: return "fuel";
    case Termination::Timeout: return "timeout";
    case Termination::Fault: return "fault";
  }
  return "?";
}

bool is_violation(Termination t) {
  return t == Termination::FieldOfView || t == Termination::RateLimit || t == Termination::FuelExhausted;
}

Termination check_termination(const TerminationInputs& in, const TerminationLimits& lim) {
  if (!in.finite) return Termination::Fault;
  if (in.fov_exceeded) return Termination::FieldOfView;
  if (max_abs(in.omega) > lim.omega_max) return Termination::RateLimit;
  if (in.mass <= lim.dry_mass) return Termination::FuelExhausted;
  if (in.closest_approach_passed) return Termination::Completed;
  if (in.t >= lim.max_time) return Termination::Timeout;
  return Termination::None;
}

}  // namespace sfc::scenario
