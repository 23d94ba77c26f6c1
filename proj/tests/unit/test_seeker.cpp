#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sfc/seeker.hpp"

using namespace sfc;
using namespace sfc::seeker;

namespace {

dynamics::MissileState missile_at_origin(const Quat& q = {1, 0, 0, 0}) {
  dynamics::MissileState m;
  m.q = q;
  return m;
}

SeekerConfig ideal_seeker() {
  SeekerConfig c;
  c.sigma_theta = 0.0;
  c.sigma_omega = 0.0;
  c.tau_theta = 0.0;
  return c;
}

}  // namespace

TEST_CASE("line-of-sight body angles") {
  const Quat id{1, 0, 0, 0};
  auto [u0, v0] = los_body_angles({}, {10, 0, 0}, id);
  CHECK(u0 == 0.0);
  CHECK(v0 == 0.0);
  auto [u1, v1] = los_body_angles({}, {0, 10, 0}, id);
  CHECK(u1 == doctest::Approx(std::numbers::pi / 2));
  CHECK(v1 == 0.0);
  const double a = 10.0 * std::numbers::pi / 180.0;
  auto [u2, v2] = los_body_angles({}, {std::cos(a), std::sin(a), 0}, id);
  CHECK(u2 == doctest::Approx(0.174533).epsilon(1e-6));
  CHECK(std::fabs(v2) < 1e-15);
  CHECK_THROWS_AS(los_body_angles({1, 1, 1}, {1, 1, 1}, id), std::domain_error);
}

TEST_CASE("scale-factor draws respect the case table") {
  Rng rng(3);
  SUBCASE("case 0 bounds") {
    const auto cfg = ScaleFactorConfig::for_case(0);
    for (int i = 0; i < 1000; ++i) {
      const auto d = sample_scale_factors(cfg, rng);
      const auto e = true_epsilon(d, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      for (double x : e) CHECK(std::fabs(x) <= 1e-4);
    }
  }
  SUBCASE("case 6 is fixed at the case-3 maxima") {
    const auto cfg = ScaleFactorConfig::for_case(6);
    for (int i = 0; i < 20; ++i) {
      const auto d = sample_scale_factors(cfg, rng);
      CHECK(d.amp_u == 5e-3);
      CHECK(d.amp_v == 5e-3);
      CHECK(d.eps_omega == Vec3{5e-3, 5e-3, 5e-3});
    }
  }
  SUBCASE("degenerate bounds give the bound") {
    auto cfg = ScaleFactorConfig::for_case(1);
    cfg.amp_theta_min = cfg.amp_theta_max = 2e-3;
    const auto d = sample_scale_factors(cfg, rng);
    CHECK(d.eps_theta_u == 2e-3);
    CHECK(d.eps_theta_v == 2e-3);
  }
  SUBCASE("all cases stay within their bounds") {
    for (int c = 0; c <= 6; ++c) {
      const auto cfg = ScaleFactorConfig::for_case(c);
      const double bound = std::max(std::fabs(cfg.amp_theta_min), cfg.amp_theta_max);
      for (int i = 0; i < 10000; ++i) {
        const auto d = sample_scale_factors(cfg, rng);
        const auto e = true_epsilon(d, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
        bool ok = std::fabs(e[0]) <= bound && std::fabs(e[1]) <= bound;
        for (int k = 2; k < 5; ++k) ok = ok && std::fabs(e[k]) <= cfg.amp_omega_max;
        REQUIRE(ok);
      }
    }
  }
  CHECK_THROWS(ScaleFactorConfig::for_case(7));
}

TEST_CASE("angle-dependent error") {
  ScaleFactorDraw d;
  d.angle_dependent = true;
  d.amp_u = d.amp_v = 1e-2;
  d.k_u = d.k_v = 1.0;
  CHECK(angle_epsilon(d, 0.0, 0.0).first == doctest::Approx(1e-2));
  CHECK(std::fabs(angle_epsilon(d, 0.25, 0.0).first) < 1e-12);
  d.k_u = 0.5;
  CHECK(angle_epsilon(d, 0.25, 0.0).first == doctest::Approx(-1e-2));

  d.k_u = 1.7;
  d.phase_u = 0.4;
  for (double th : {-0.3, 0.0, 0.2}) CHECK(std::fabs(angle_epsilon(d, th + 1.7, 0).first - angle_epsilon(d, th, 0).first) < 1e-12);
}

TEST_CASE("observation model") {
  Rng rng(1);
  ScaleFactorDraw none;
  SUBCASE("ideal seeker reports ground truth") {
    const Quat q = quat_from_axis_angle({0.2, 0.5, 1.0}, 0.3);
    auto m = missile_at_origin(q);
    m.omega = {0.3, -0.2, 0.1};
    const dynamics::TargetState t{{1000, 150, -80}, {}};
    AngleFilter f;
    const auto meas = observe(m, t, none, ideal_seeker(), f, rng, 0.02);
    const auto [u, v] = los_body_angles(m.r, t.r, m.q);
    CHECK(meas.obs.theta_u == u);
    CHECK(meas.obs.theta_v == v);
    CHECK(meas.obs.omega == m.omega);
  }
  SUBCASE("angle and rate scale factors multiply") {
    ScaleFactorDraw d;
    d.eps_theta_u = 5e-3;
    d.eps_omega = {1e-2, 0, 0};
    auto m = missile_at_origin();
    m.omega = {1, 0, 0};
    const dynamics::TargetState t{{std::cos(0.1), std::sin(0.1), 0}, {}};
    AngleFilter f;
    const auto meas = observe(m, t, d, ideal_seeker(), f, rng, 0.02);
    CHECK(meas.raw.theta_u == doctest::Approx(0.1005));
    CHECK(meas.raw.omega.x == doctest::Approx(1.01));
    CHECK(meas.raw.omega.y == 0.0);
  }
  SUBCASE("angle noise has the configured spread") {
    auto cfg = ideal_seeker();
    cfg.sigma_theta = 1e-3;
    const auto m = missile_at_origin();
    const dynamics::TargetState t{{1000, 0, 0}, {}};
    double s = 0.0, s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      AngleFilter f;
      const double e = observe(m, t, none, cfg, f, rng, 0.02).raw.theta_u;
      s += e;
      s2 += e * e;
    }
    const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
    CHECK(std::fabs(sd - 1e-3) < 0.03e-3);
  }
}

TEST_CASE("angle filter is a first-order lag") {
  AngleFilter f;
  CHECK(f.update(1.0, 2.0, 0.02, 0.02).first == 1.0);
  const auto [u, v] = f.update(0.0, 0.0, 0.02, 0.02);
  CHECK(u == doctest::Approx(std::exp(-1.0)));
  CHECK(v == doctest::Approx(2.0 * std::exp(-1.0)));
  AngleFilter bypass;
  bypass.update(1.0, 1.0, 0.02, 0.0);
  CHECK(bypass.update(0.3, 0.4, 0.02, 0.0).first == 0.3);
}
