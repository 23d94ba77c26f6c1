#include "sfc/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "sfc/rk4.hpp"

namespace sfc::dynamics {

const ThrusterTable& default_thrusters() {
  static const ThrusterTable table = {{
      {{0, -1, 0}, {0, -0.25, 0}, 5000.0},
      {{0, 1, 0}, {0, 0.25, 0}, 5000.0},
      {{0, 0, 1}, {0, 0, 0.25}, 5000.0},
      {{0, 0, -1}, {0, 0, -0.25}, 5000.0},
      {{0, 0, 1}, {0, -0.25, 0}, 125.0},
      {{0, 0, -1}, {0, 0.25, 0}, 125.0},
      {{0, -1, 0}, {0, 0, 0.25}, 125.0},
      {{0, 1, 0}, {0, 0, -0.25}, 125.0},
      {{0, 0, -1}, {0.5, 0, -0.25}, 125.0},
      {{0, 0, 1}, {-0.5, 0, 0.25}, 125.0},
      {{0, 0, 1}, {0.5, 0, 0.25}, 125.0},
      {{0, 0, -1}, {-0.5, 0, -0.25}, 125.0},
      {{0, -1, 0}, {0.5, -0.25, 0}, 125.0},
      {{0, 1, 0}, {-0.5, 0.25, 0}, 125.0},
      {{0, 1, 0}, {0.5, 0.25, 0}, 125.0},
      {{0, -1, 0}, {-0.5, -0.25, 0}, 125.0},
  }};
  return table;
}

Mat3 inertia_tensor(double mass, const MissileConfig& cfg) {
  const double r2 = cfg.radius * cfg.radius;
  const double h2 = cfg.height * cfg.height;
  const double transverse = mass * (3.0 * r2 + h2) / 12.0;
  return Mat3::diag(mass * r2 / 2.0, transverse, transverse);
}

Mat3 inertia_rate(double mass_rate, const MissileConfig& cfg) { return inertia_tensor(mass_rate, cfg); }

Vec3 center_of_mass(const Vec3& r_com_final, double fuel_used, double fuel_capacity) {
  return r_com_final * (fuel_used / fuel_capacity);
}

Wrench thruster_wrench(const ThrusterCommand& cmd, const ThrusterTable& table, const Vec3& r_com) {
  Wrench w;
  for (int i = 0; i < kThrusterCount; ++i) {
    if (!cmd.test(i)) continue;
    const ThrusterSpec& t = table[i];
    const Vec3 f = t.direction * t.thrust;
    w.force += f;
    w.torque += cross(t.position - r_com, f);
    w.thrust_sum += t.thrust;
  }
  return w;
}

Vec3 GravityModel::acceleration(const Vec3& r) const {
  switch (mode) {
    case GravityMode::Off:
      return {};
    case GravityMode::Uniform:
      return {0.0, 0.0, -uniform_g};
    case GravityMode::PointMass: {
      const Vec3 geo = r + Vec3{0.0, 0.0, earth_radius + altitude};
      const double d = norm(geo);
      return geo * (-mu / (d * d * d));
    }
  }
  return {};
}

namespace {

Vec3 vec_at(const auto& x, std::size_t i) { return {x[i], x[i + 1], x[i + 2]}; }

void put(auto& x, std::size_t i, const Vec3& v) {
  x[i] = v.x;
  x[i + 1] = v.y;
  x[i + 2] = v.z;
}

Quat quat_at(const auto& x, std::size_t i) { return {x[i], x[i + 1], x[i + 2], x[i + 3]}; }

void put(auto& x, std::size_t i, const Quat& q) {
  x[i] = q.w;
  x[i + 1] = q.x;
  x[i + 2] = q.y;
  x[i + 3] = q.z;
}

Vec3 rigid_body_accel(const Vec3& w, const Mat3& j, const Mat3& jdot, const Vec3& torque) {
  return solve(j, -cross(w, j * w) - jdot * w + torque);
}

}  // namespace

std::pair<Vec3, Vec3> lag_step(const Vec3& force, const Vec3& torque, const Vec3& force_cmd, const Vec3& torque_cmd,
                               double tau, double dt) {
  StateVector<6> x{};
  put(x, 0, force);
  put(x, 3, torque);
  const auto out = rk4_step(x, 0.0, dt, [&](double, const StateVector<6>& s) {
    StateVector<6> d{};
    put(d, 0, (force_cmd - vec_at(s, 0)) / tau);
    put(d, 3, (torque_cmd - vec_at(s, 3)) / tau);
    return d;
  });
  return {vec_at(out, 0), vec_at(out, 3)};
}

Vec3 euler_rotation_step(const Vec3& omega, const Mat3& inertia, const Mat3& inertia_dot, const Vec3& torque,
                         double dt) {
  StateVector<3> x{};
  put(x, 0, omega);
  const auto out = rk4_step(x, 0.0, dt, [&](double, const StateVector<3>& s) {
    StateVector<3> d{};
    put(d, 0, rigid_body_accel(vec_at(s, 0), inertia, inertia_dot, torque));
    return d;
  });
  return vec_at(out, 0);
}

Quat quaternion_step(const Quat& q, const Vec3& omega, double dt) { return quaternion_step(q, omega, omega, dt); }

Quat quaternion_step(const Quat& q, const Vec3& omega0, const Vec3& omega1, double dt) {
  StateVector<4> x{};
  put(x, 0, q);
  const auto out = rk4_step(x, 0.0, dt, [&](double t, const StateVector<4>& s) {
    const double a = t / dt;
    StateVector<4> d{};
    put(d, 0, quat_derivative(quat_at(s, 0), omega0 * (1.0 - a) + omega1 * a));
    return d;
  });
  return quat_at(out, 0).normalized();
}

TranslationalResult translational_step(const Vec3& r, const Vec3& v, double mass, const Vec3& force_body,
                                       double thrust_sum, const Quat& q, const GravityModel& gravity, double isp,
                                       double dry_mass, double dt) {
  const Mat3 body_to_inertial = dcm_from_quat(q).transposed();
  const Vec3 force_n = body_to_inertial * force_body;
  const double mdot = -thrust_sum / (isp * kGRef);
  StateVector<7> x{};
  put(x, 0, r);
  put(x, 3, v);
  x[6] = mass;
  const auto out = rk4_step(x, 0.0, dt, [&](double, const StateVector<7>& s) {
    StateVector<7> d{};
    put(d, 0, vec_at(s, 3));
    put(d, 3, force_n / s[6] + gravity.acceleration(vec_at(s, 0)));
    d[6] = mdot;
    return d;
  });
  return {vec_at(out, 0), vec_at(out, 3), out[6], out[6] <= dry_mass};
}

TargetState target_step(const TargetState& target, const Vec3& accel_cmd, const GravityModel& gravity, double dt) {
  return target_step(target, [&](double, const Vec3&) { return accel_cmd; }, 0.0, gravity, dt);
}

TargetState target_step(const TargetState& target, const TargetAccel& accel, double t, const GravityModel& gravity,
                        double dt) {
  StateVector<6> x{};
  put(x, 0, target.r);
  put(x, 3, target.v);
  const auto out = rk4_step(x, t, dt, [&](double ts, const StateVector<6>& s) {
    StateVector<6> d{};
    const Vec3 vel = vec_at(s, 3);
    put(d, 0, vel);
    put(d, 3, accel(ts, vel) + gravity.acceleration(vec_at(s, 0)));
    return d;
  });
  return {vec_at(out, 0), vec_at(out, 3)};
}

bool missile_step(MissileState& s, const ThrusterCommand& cmd, const ThrusterTable& table, const Vec3& r_com_final,
                  const MissileConfig& cfg, const GravityModel& gravity, double dt) {
  // Each thruster's force lags its command; the moment arm follows the center of
  // mass as propellant drains. Torques are therefore lagged about the body origin
  // and moved to the current center of mass at every stage.
  auto com_at = [&](double mass) { return center_of_mass(r_com_final, cfg.wet_mass - mass, cfg.fuel_capacity()); };
  const Wrench target = thruster_wrench(cmd, table, Vec3{});
  const Vec3 torque_origin = s.torque + cross(s.r_com, s.force);
  const double flow = 1.0 / (cfg.isp * kGRef);

  // The thrust lag has a closed form under a held command, so force, torque and
  // thrust magnitude are evaluated exactly at each stage time.
  const double tau = cfg.thrust_tau;
  auto lagged = [&](double t) {
    const double k = tau > 0.0 ? std::exp(-t / tau) : 0.0;
    return Wrench{target.force + (s.force - target.force) * k, target.torque + (torque_origin - target.torque) * k,
                  target.thrust_sum + (s.thrust_sum - target.thrust_sum) * k};
  };

  // Layout: r(0) v(3) q(6) omega(10) mass(13)
  StateVector<14> x{};
  put(x, 0, s.r);
  put(x, 3, s.v);
  put(x, 6, s.q);
  put(x, 10, s.omega);
  x[13] = s.mass;

  const auto out = rk4_step(x, 0.0, dt, [&](double t, const StateVector<14>& st) {
    StateVector<14> d{};
    const Quat q = quat_at(st, 6).normalized();
    const Vec3 w = vec_at(st, 10);
    const double m = st[13];
    const Wrench now = lagged(t);
    const double mdot = -now.thrust_sum * flow;
    const Mat3 j = inertia_tensor(m, cfg);
    const Mat3 jdot = inertia_rate(mdot, cfg);

    put(d, 0, vec_at(st, 3));
    put(d, 3, dcm_from_quat(q).transposed() * now.force / m + gravity.acceleration(vec_at(st, 0)));
    put(d, 6, quat_derivative(quat_at(st, 6), w));
    put(d, 10, rigid_body_accel(w, j, jdot, now.torque - cross(com_at(m), now.force)));
    d[13] = mdot;
    return d;
  });

  const Wrench end = lagged(dt);
  s.r = vec_at(out, 0);
  s.v = vec_at(out, 3);
  s.q = quat_at(out, 6).normalized();
  s.omega = vec_at(out, 10);
  // Thrust stops with the last of the propellant; the overshoot inside one step is not burned.
  s.mass = std::max(out[13], cfg.dry_mass);
  s.r_com = com_at(s.mass);
  s.force = end.force;
  s.torque = end.torque - cross(s.r_com, end.force);
  s.thrust_sum = end.thrust_sum;
  return s.mass <= cfg.dry_mass;
}

}  // namespace sfc::dynamics
