#include "sfc/seeker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace sfc::seeker {

ScaleFactorConfig ScaleFactorConfig::for_case(int case_id) {
  ScaleFactorConfig c;
  c.case_id = case_id;
  auto constant = [&](double bound) {
    c.angle_dependent = false;
    c.amp_theta_min = -bound;
    c.amp_theta_max = bound;
    c.amp_omega_max = bound;
  };
  switch (case_id) {
    case 0: constant(1e-4); break;
    case 1: constant(1e-3); break;
    case 2: constant(5e-3); break;
    case 3:
      c.angle_dependent = true;
      c.amp_theta_min = 0.0;
      c.amp_theta_max = 5e-3;
      c.amp_omega_max = 5e-3;
      break;
    case 4: constant(1e-2); break;
    case 5:
      c.angle_dependent = true;
      c.amp_theta_min = 0.0;
      c.amp_theta_max = 1e-2;
      c.amp_omega_max = 1e-2;
      break;
    case 6:
      c.angle_dependent = true;
      c.amp_theta_min = 5e-3;
      c.amp_theta_max = 5e-3;
      c.amp_omega_max = 5e-3;
      c.fixed_omega = true;
      break;
    default:
      throw std::invalid_argument("unknown scale factor case " + std::to_string(case_id));
  }
  return c;
}

bool ScaleFactorConfig::valid() const {
  return amp_theta_min <= amp_theta_max && amp_omega_max >= 0.0 && k_min > 0.0 && k_min <= k_max &&
         phase_min <= phase_max;
}

ScaleFactorDraw sample_scale_factors(const ScaleFactorConfig& cfg, Rng& rng) {
  ScaleFactorDraw d;
  d.angle_dependent = cfg.angle_dependent;
  if (cfg.angle_dependent) {
    d.amp_u = rng.uniform(cfg.amp_theta_min, cfg.amp_theta_max);
    d.amp_v = rng.uniform(cfg.amp_theta_min, cfg.amp_theta_max);
    d.k_u = rng.uniform(cfg.k_min, cfg.k_max);
    d.k_v = rng.uniform(cfg.k_min, cfg.k_max);
    d.phase_u = rng.uniform(cfg.phase_min, cfg.phase_max);
    d.phase_v = rng.uniform(cfg.phase_min, cfg.phase_max);
  } else {
    d.eps_theta_u = rng.uniform(cfg.amp_theta_min, cfg.amp_theta_max);
    d.eps_theta_v = rng.uniform(cfg.amp_theta_min, cfg.amp_theta_max);
  }
  if (cfg.fixed_omega) {
    d.eps_omega = {cfg.amp_omega_max, cfg.amp_omega_max, cfg.amp_omega_max};
  } else {
    const double a = cfg.amp_omega_max;
    d.eps_omega.x = rng.uniform(-a, a);
    d.eps_omega.y = rng.uniform(-a, a);
    d.eps_omega.z = rng.uniform(-a, a);
  }
  return d;
}

std::pair<double, double> angle_epsilon(const ScaleFactorDraw& draw, double theta_u, double theta_v) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return {draw.amp_u * std::cos(two_pi * theta_u / draw.k_u + draw.phase_u),
          draw.amp_v * std::cos(two_pi * theta_v / draw.k_v + draw.phase_v)};
}

Vec5 true_epsilon(const ScaleFactorDraw& draw, double theta_u, double theta_v) {
  double eu = draw.eps_theta_u;
  double ev = draw.eps_theta_v;
  if (draw.angle_dependent) std::tie(eu, ev) = angle_epsilon(draw, theta_u, theta_v);
  return {eu, ev, draw.eps_omega.x, draw.eps_omega.y, draw.eps_omega.z};
}

std::pair<double, double> los_body_angles(const Vec3& r_missile, const Vec3& r_target, const Quat& q) {
  const Vec3 rel = r_target - r_missile;
  const double range = norm(rel);
  if (!(range > 0.0)) throw std::domain_error("line of sight undefined at zero range");
  const Vec3 los_b = dcm_from_quat(q) * (rel / range);
  return {std::asin(std::clamp(los_b.y, -1.0, 1.0)), std::asin(std::clamp(los_b.z, -1.0, 1.0))};
}

std::pair<double, double> AngleFilter::update(double theta_u, double theta_v, double dt, double tau) {
  if (!initialized_ || tau <= 0.0) {
    u_ = theta_u;
    v_ = theta_v;
    initialized_ = true;
    return {u_, v_};
  }
  const double a = 1.0 - std::exp(-dt / tau);
  u_ += a * (theta_u - u_);
  v_ += a * (theta_v - v_);
  return {u_, v_};
}

Measurement observe(const dynamics::MissileState& missile, const dynamics::TargetState& target,
                    const ScaleFactorDraw& draw, const SeekerConfig& cfg, AngleFilter& filter, Rng& rng, double dt) {
  Measurement m;
  std::tie(m.true_theta_u, m.true_theta_v) = los_body_angles(missile.r, target.r, missile.q);
  m.eps = true_epsilon(draw, m.true_theta_u, m.true_theta_v);
  m.fov_exceeded = std::fabs(m.true_theta_u) > cfg.fov_half_angle || std::fabs(m.true_theta_v) > cfg.fov_half_angle;

  m.raw.theta_u = (1.0 + m.eps[0]) * m.true_theta_u + rng.normal(0.0, cfg.sigma_theta);
  m.raw.theta_v = (1.0 + m.eps[1]) * m.true_theta_v + rng.normal(0.0, cfg.sigma_theta);
  m.raw.omega = hadamard(Vec3{1.0 + m.eps[2], 1.0 + m.eps[3], 1.0 + m.eps[4]}, missile.omega);
  m.raw.omega.x += rng.normal(0.0, cfg.sigma_omega);
  m.raw.omega.y += rng.normal(0.0, cfg.sigma_omega);
  m.raw.omega.z += rng.normal(0.0, cfg.sigma_omega);

  m.obs = m.raw;
  std::tie(m.obs.theta_u, m.obs.theta_v) = filter.update(m.raw.theta_u, m.raw.theta_v, dt, cfg.tau_theta);
  return m;
}

}  // namespace sfc::seeker
