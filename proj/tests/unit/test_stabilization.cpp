#include "doctest.h"

#include <cmath>
#include <numbers>

#include "sfc/dynamics.hpp"
#include "sfc/stabilization.hpp"

using namespace sfc;
using namespace sfc::stabilization;

TEST_CASE("compensation divides out the estimate") {
  seeker::Observation o{0.1005, -0.2, {1.01, 0.5, -0.3}};
  const auto same = compensate(o, {0, 0, 0, 0, 0});
  CHECK(same.obs.theta_u == o.theta_u);
  CHECK(same.obs.omega == o.omega);
  CHECK(!same.clamped);

  const auto c = compensate(o, {5e-3, 0, 1e-2, 0, 0});
  CHECK(c.obs.theta_u == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c.obs.omega.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.obs.omega.y == 0.5);

  const auto clipped = compensate(o, {0.5, std::nan(""), 0, 0, 0}, 0.1);
  CHECK(clipped.clamped);
  CHECK(clipped.obs.theta_u == doctest::Approx(0.1005 / 1.1));
  CHECK(clipped.obs.theta_v == o.theta_v);
}

TEST_CASE("compensation inverts distortion exactly") {
  const seeker::Vec5 eps{3e-3, -4e-3, 5e-3, -1e-3, 2e-3};
  const double u = 0.21, v = -0.13;
  const Vec3 w{0.7, -1.3, 0.2};
  seeker::Observation distorted{(1 + eps[0]) * u, (1 + eps[1]) * v,
                                {(1 + eps[2]) * w.x, (1 + eps[3]) * w.y, (1 + eps[4]) * w.z}};
  const auto c = compensate(distorted, eps);
  CHECK(c.obs.theta_u == doctest::Approx(u).epsilon(1e-15));
  CHECK(c.obs.theta_v == doctest::Approx(v).epsilon(1e-15));
  CHECK(norm(c.obs.omega - w) < 1e-15);
}

TEST_CASE("attitude change integration") {
  StabilizerState s{{1, 0, 0, 0}};
  CHECK(integrate_dq(s, Vec3{}, 0.02).dq == s.dq);
  for (int i = 0; i < 50; ++i) s = integrate_dq(s, {std::numbers::pi, 0, 0}, 0.02);
  CHECK(std::fabs(s.dq.w) < 1e-6);
  CHECK(std::fabs(s.dq.x - 1.0) < 1e-6);

  // Tracking the dynamics propagation under a time-varying rate.
  const Mat3 j = dynamics::inertia_tensor(40.0, {});
  Vec3 w{0.5, 1.0, -0.7};
  Quat q{1, 0, 0, 0};
  StabilizerState est{{1, 0, 0, 0}};
  for (int i = 0; i < 50; ++i) {
    const Vec3 w_next = dynamics::euler_rotation_step(w, j, {}, {1.0, 0.0, 0.0}, 0.02);
    q = dynamics::quaternion_step(q, w, w_next, 0.02);
    est = integrate_dq(est, w, w_next, 0.02);
    w = w_next;
  }
  CHECK(attitude_angle_between(q, est.dq) < 1e-5);
}

TEST_CASE("stabilized angles") {
  const auto same = stabilize(0.1, -0.2, {1, 0, 0, 0});
  CHECK(same.theta_u == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(same.theta_v == doctest::Approx(-0.2).epsilon(1e-14));
  const auto bore = stabilize(0.0, 0.0, {1, 0, 0, 0});
  CHECK(bore.los == Vec3{1, 0, 0});
  CHECK(stabilize(1.2, 1.2, {1, 0, 0, 0}).clamped);
}

TEST_CASE("stabilized angles are invariant to roll about the boresight") {
  // Target fixed off-axis; the body rolls about x at 1 rad/s with perfect rates.
  const Vec3 los_n = normalized(Vec3{1000, 40, -25});
  const double u_ref = std::asin(los_n.y), v_ref = std::asin(los_n.z);
  StabilizerState s{{1, 0, 0, 0}};
  const Vec3 w{1.0, 0, 0};
  for (int i = 0; i <= 100; ++i) {
    const auto [u, v] = seeker::los_body_angles({}, los_n * 1000.0, s.dq);
    const auto st = stabilize(u, v, s.dq);
    CHECK(std::fabs(st.theta_u - u_ref) < 1e-4);
    CHECK(std::fabs(st.theta_v - v_ref) < 1e-4);
    s = integrate_dq(s, w, 0.02);
  }
}

TEST_CASE("attitude lag") {
  const Quat a{1, 0, 0, 0};
  const Quat b = quat_from_axis_angle({0, 0, 1}, 0.4);
  CHECK(lag_attitude(a, b, 0.02, 0.0) == b);
  const Quat half = lag_attitude(a, b, 0.02, 0.02);
  CHECK(attitude_angle_between(a, half) > 0.0);
  CHECK(attitude_angle_between(a, half) < 0.4);
  // The sign flip of an equivalent quaternion does not change the result.
  const Quat neg{-b.w, -b.x, -b.y, -b.z};
  CHECK(attitude_angle_between(lag_attitude(a, neg, 0.02, 0.02), half) < 1e-12);
}
