#include "sfc/stabilization.hpp"

#include <algorithm>
#include <cmath>

#include "sfc/dynamics.hpp"

namespace sfc::stabilization {

Compensation compensate(const seeker::Observation& obs, const Vec5& eps_hat, double max_abs_eps) {
  Compensation c;
  Vec5 e = eps_hat;
  for (double& v : e) {
    if (!(std::fabs(v) <= max_abs_eps)) {
      c.clamped = true;
      v = std::isnan(v) ? 0.0 : std::clamp(v, -max_abs_eps, max_abs_eps);
    }
  }
  c.obs.theta_u = obs.theta_u / (1.0 + e[0]);
  c.obs.theta_v = obs.theta_v / (1.0 + e[1]);
  c.obs.omega = {obs.omega.x / (1.0 + e[2]), obs.omega.y / (1.0 + e[3]), obs.omega.z / (1.0 + e[4])};
  return c;
}

StabilizerState integrate_dq(const StabilizerState& s, const Vec3& omega, double dt) {
  return {dynamics::quaternion_step(s.dq, omega, dt)};
}

StabilizerState integrate_dq(const StabilizerState& s, const Vec3& omega_prev, const Vec3& omega_now, double dt) {
  return {dynamics::quaternion_step(s.dq, omega_prev, omega_now, dt)};
}

Quat lag_attitude(const Quat& lagged, const Quat& current, double dt, double tau) {
  if (tau <= 0.0) return current;
  const double a = 1.0 - std::exp(-dt / tau);
  const double sign = lagged.w * current.w + lagged.x * current.x + lagged.y * current.y + lagged.z * current.z < 0.0
                          ? -1.0
                          : 1.0;
  const Quat q{lagged.w + a * (sign * current.w - lagged.w), lagged.x + a * (sign * current.x - lagged.x),
               lagged.y + a * (sign * current.y - lagged.y), lagged.z + a * (sign * current.z - lagged.z)};
  return q.normalized();
}

StabilizedAngles stabilize(double theta_u, double theta_v, const Quat& dq) {
  StabilizedAngles out;
  const double y = std::sin(theta_u);
  const double z = std::sin(theta_v);
  double radicand = 1.0 - y * y - z * z;
  if (radicand < 0.0) {
    out.clamped = true;
    radicand = 0.0;
  }
  const Vec3 los_b{std::sqrt(radicand), y, z};
  out.los = dcm_from_quat(dq).transposed() * los_b;
  out.theta_u = std::asin(std::clamp(out.los.y, -1.0, 1.0));
  out.theta_v = std::asin(std::clamp(out.los.z, -1.0, 1.0));
  return out;
}

}  // namespace sfc::stabilization
