#include "doctest.h"

#include <cmath>
#include <numbers>

#include "sfc/dynamics.hpp"

using namespace sfc;
using namespace sfc::dynamics;

namespace {

ThrusterCommand fire(std::initializer_list<int> ids) {
  ThrusterCommand c;
  for (int i : ids) c.set(i);
  return c;
}

GravityModel no_gravity() {
  GravityModel g;
  g.mode = GravityMode::Off;
  return g;
}

}  // namespace

TEST_CASE("thruster wrench examples") {
  const auto& table = default_thrusters();
  SUBCASE("all off") {
    const auto w = thruster_wrench({}, table, {});
    CHECK(w.force == Vec3{});
    CHECK(w.torque == Vec3{});
    CHECK(w.thrust_sum == 0.0);
  }
  SUBCASE("first divert thruster acts through the centroid") {
    const auto w = thruster_wrench(fire({0}), table, {});
    CHECK(w.force == Vec3{0, -5000, 0});
    CHECK(w.torque == Vec3{});
    CHECK(w.thrust_sum == 5000.0);
  }
  SUBCASE("roll pair") {
    const auto w = thruster_wrench(fire({4, 5}), table, {});
    CHECK(w.force == Vec3{});
    CHECK(w.torque == Vec3{-62.5, 0, 0});
  }
}

TEST_CASE("every attitude pair gives a pure single-axis torque") {
  const auto& table = default_thrusters();
  struct Row {
    int a, b;
    Vec3 torque;
  };
  // r x F worked out by hand for each pair.
  const Row rows[] = {{4, 5, {-62.5, 0, 0}},  {6, 7, {62.5, 0, 0}},  {8, 9, {0, 125, 0}},
                      {10, 11, {0, -125, 0}}, {12, 13, {0, 0, -125}}, {14, 15, {0, 0, 125}}};
  for (const auto& r : rows) {
    CAPTURE(r.a);
    const auto w = thruster_wrench(fire({r.a, r.b}), table, {});
    CHECK(w.force == Vec3{});
    CHECK(w.torque == r.torque);
    CHECK(w.thrust_sum == 250.0);
  }
}

TEST_CASE("thrust lag") {
  const Vec3 f{100, -50, 20}, l{1, 2, 3};
  SUBCASE("fixed point") {
    const auto [f1, l1] = lag_step(f, l, f, l, 0.02, 0.02);
    CHECK(norm(f1 - f) < 1e-12);
    CHECK(norm(l1 - l) < 1e-12);
  }
  SUBCASE("step response after one time constant") {
    Vec3 force, torque;
    for (int i = 0; i < 100; ++i) std::tie(force, torque) = lag_step(force, torque, f, l, 0.02, 0.0002);
    const double expected = 1.0 - std::exp(-1.0);
    CHECK(norm(force - f * expected) / norm(f * expected) < 1e-6);
    CHECK(norm(torque - l * expected) / norm(l * expected) < 1e-6);
  }
  SUBCASE("decay over five time constants") {
    Vec3 force = f, torque = l;
    for (int i = 0; i < 5; ++i) std::tie(force, torque) = lag_step(force, torque, {}, {}, 0.02, 0.02);
    CHECK(norm(force) < 0.01 * norm(f));
  }
}

TEST_CASE("torque-free rotation") {
  const Mat3 zero{};
  SUBCASE("principal-axis spin stays constant") {
    const Mat3 j = Mat3::diag(1.0, 2.0, 3.0);
    const Vec3 w{0, 2.0, 0};
    CHECK(euler_rotation_step(w, j, zero, {}, 0.02) == w);
  }
  SUBCASE("spherical inertia keeps any rate") {
    const Mat3 j = Mat3::diag(2.0, 2.0, 2.0);
    const Vec3 w{0.3, -1.2, 0.7};
    CHECK(norm(euler_rotation_step(w, j, zero, {}, 0.02) - w) < 1e-15);
  }
  SUBCASE("asymmetric body conserves |J w| per step") {
    const Mat3 j = Mat3::diag(1.0, 2.0, 3.0);
    Vec3 w{0.4, 1.1, -0.8};
    const double h0 = norm(j * w);
    for (int i = 0; i < 50; ++i) {
      w = euler_rotation_step(w, j, zero, {}, 0.02);
      CHECK(std::fabs(norm(j * w) - h0) / h0 < 1e-8);
    }
  }
}

TEST_CASE("quaternion kinematics") {
  const Quat id{1, 0, 0, 0};
  CHECK(quaternion_step(id, {}, 0.02) == id);

  Quat q = id;
  for (int i = 0; i < 50; ++i) {
    q = quaternion_step(q, {std::numbers::pi, 0, 0}, 0.02);
    const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    CHECK(std::fabs(n - 1.0) < 1e-9);
  }
  CHECK(std::fabs(q.w) < 1e-6);
  CHECK(std::fabs(q.x - 1.0) < 1e-6);
  CHECK(std::fabs(q.y) < 1e-6);
  CHECK(std::fabs(q.z) < 1e-6);
}

TEST_CASE("translational motion and mass flow") {
  const auto g = no_gravity();
  const Quat id{1, 0, 0, 0};
  SUBCASE("coasting") {
    const auto r = translational_step({1, 2, 3}, {100, 0, -5}, 40.0, {}, 0.0, id, g, 250.0, 25.0, 0.02);
    CHECK(norm(r.r - Vec3{3, 2, 2.9}) < 1e-12);
    CHECK(r.v == Vec3{100, 0, -5});
    CHECK(r.mass == 40.0);
  }
  SUBCASE("single divert") {
    const double mdot = 5000.0 / (250.0 * kGRef);
    CHECK(mdot == doctest::Approx(2.0387).epsilon(1e-4));
    const double dt = 1e-4;
    const auto r = translational_step({}, {}, 50.0, {0, 5000, 0}, 5000.0, id, g, 250.0, 25.0, dt);
    CHECK(std::fabs((50.0 - r.mass) / dt - mdot) < 1e-6);
    // v' = F/m at the start of the step.
    CHECK(std::fabs(r.v.y / dt - 100.0) < 1e-2);
    CHECK(!r.fuel_exhausted);
  }
}

TEST_CASE("target motion") {
  const auto g = no_gravity();
  SUBCASE("ballistic straight line") {
    const auto s = target_step({{0, 0, 0}, {-4000, 0, 0}}, Vec3{}, g, 0.02);
    CHECK(norm(s.r - Vec3{-80, 0, 0}) < 1e-9);
    CHECK(s.v == Vec3{-4000, 0, 0});
  }
  SUBCASE("acceleration orthogonal to velocity keeps the speed") {
    auto accel = [](double, const Vec3& v) {
      const Vec3 side = normalized(cross(v, Vec3{0, 0, 1}));
      return side * 49.05;
    };
    const auto s = target_step({{}, {-4000, 0, 0}}, accel, 0.0, g, 0.02);
    CHECK(std::fabs(norm(s.v) - 4000.0) / 4000.0 < 1e-4);
    CHECK(norm(Vec3{0, 49.05, 0}) == doctest::Approx(5.0 * 9.81));
  }
}

TEST_CASE("missile step burns fuel monotonically and matches the thrust integral") {
  MissileConfig cfg;
  const auto g = no_gravity();
  MissileState s;
  s.q = {1, 0, 0, 0};
  s.v = {3000, 0, 0};
  const auto& table = default_thrusters();
  double integral = 0.0;
  double prev_mass = s.mass;
  double prev_thrust = s.thrust_sum;
  const double dt = 0.02;
  for (int i = 0; i < 100; ++i) {
    const auto cmd = (i / 10) % 2 == 0 ? fire({1, 8, 9}) : ThrusterCommand{};
    missile_step(s, cmd, table, {0.01, 0, 0}, cfg, g, dt);
    integral += 0.5 * (prev_thrust + s.thrust_sum) * dt;
    prev_thrust = s.thrust_sum;
    CHECK(s.mass <= prev_mass);
    prev_mass = s.mass;
  }
  const double used = 50.0 - s.mass;
  const double expected = integral / (cfg.isp * kGRef);
  CHECK(std::fabs(used - expected) / expected < 1e-3);
}

TEST_CASE("point-mass gravity points down at the frame origin") {
  GravityModel g;
  const Vec3 a = g.acceleration({});
  CHECK(std::fabs(a.x) < 1e-12);
  CHECK(std::fabs(a.y) < 1e-12);
  CHECK(a.z == doctest::Approx(-g.mu / std::pow(g.earth_radius + g.altitude, 2)));
}
