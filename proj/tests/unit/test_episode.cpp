#include "doctest.h"

#include <cmath>

#include "sfc/montecarlo.hpp"
#include "sfc/parallel.hpp"
#include "sfc/scenario.hpp"

using namespace sfc;
using namespace sfc::episode;

namespace {

EnvironmentConfig ideal_environment() {
  EnvironmentConfig env;
  env.seeker.sigma_theta = 0.0;
  env.seeker.sigma_omega = 0.0;
  env.scenario.maneuvers = false;
  return env;
}

seeker::ScaleFactorConfig no_errors() {
  auto sf = seeker::ScaleFactorConfig::for_case(0);
  sf.amp_theta_min = sf.amp_theta_max = sf.amp_omega_max = 0.0;
  return sf;
}

pcm::PcmParams small_model(std::uint64_t seed) {
  pcm::PcmConfig c;
  c.hidden = 8;
  return pcm::PcmParams::random(c, seed);
}

}  // namespace

TEST_CASE("episodes are reproducible from their seed") {
  const EnvironmentConfig env;
  const auto sf = seeker::ScaleFactorConfig::for_case(3);
  const auto a = run_episode(env, sf, 77, Mode::Baseline, nullptr).record;
  const auto b = run_episode(env, sf, 77, Mode::Baseline, nullptr).record;
  CHECK(a.miss == b.miss);
  CHECK(a.fuel_used == b.fuel_used);
  CHECK(a.steps == b.steps);
  CHECK(a.termination == b.termination);
  const auto c = run_episode(env, sf, 78, Mode::Baseline, nullptr).record;
  CHECK(c.miss != a.miss);
}

TEST_CASE("records respect their invariants") {
  const EnvironmentConfig env;
  montecarlo::BatchSpec spec;
  spec.case_id = 4;
  spec.episodes = 20;
  spec.seed = 3;
  const auto recs = montecarlo::run_batch(env, spec);
  for (const auto& r : recs) {
    CHECK(r.miss >= 0.0);
    CHECK(r.fuel_used >= 0.0);
    CHECK(r.fuel_used <= 25.0 + 1e-9);
    CHECK(r.termination != scenario::Termination::None);
    CHECK(r.case_id == 4);
  }
}

TEST_CASE("a model with a silent estimate head reproduces the baseline") {
  auto p = small_model(5);
  for (auto t : {pcm::Tensor::Fc4W, pcm::Tensor::Fc4B})
    for (double& v : p.tensor(t)) v = 0.0;
  const EnvironmentConfig env;
  const auto sf = seeker::ScaleFactorConfig::for_case(3);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto base = run_episode(env, sf, seed, Mode::Baseline, nullptr).record;
    const auto comp = run_episode(env, sf, seed, Mode::Compensated, &p).record;
    CHECK(base.miss == comp.miss);
    CHECK(base.fuel_used == comp.fuel_used);
    CHECK(base.termination == comp.termination);
  }
}

TEST_CASE("compensated mode needs a model") {
  CHECK_THROWS(run_episode({}, seeker::ScaleFactorConfig::for_case(3), 1, Mode::Compensated, nullptr));
}

TEST_CASE("trajectory log") {
  EpisodeOptions o;
  o.record_trajectory = true;
  const auto r = run_episode({}, seeker::ScaleFactorConfig::for_case(3), 9, Mode::Oracle, nullptr, o).record;
  REQUIRE(!r.trajectory.empty());
  // One row per navigation tick.
  CHECK(r.trajectory.size() >= r.steps);
  CHECK(r.trajectory.size() <= 2 * r.steps);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory[i].t > r.trajectory[i - 1].t);
    CHECK(r.trajectory[i].fuel_kg <= r.trajectory[i - 1].fuel_kg);
  }
  // The oracle divides out the true errors.
  CHECK(r.trajectory.back().eps_hat == r.trajectory.back().eps_true);
}

TEST_CASE("fine integration throughout agrees with the dual-timestep run") {
  // Open loop: scripted pulses, then a coast through closest approach.
  const dynamics::MissileConfig mc;
  const dynamics::GravityModel g;
  const auto& table = dynamics::default_thrusters();
  auto fly = [&](bool always_fine) {
    dynamics::MissileState m;
    m.q = {1, 0, 0, 0};
    m.v = {3000, 0, 0};
    dynamics::TargetState t{{49000, 20, -15}, {-4000, 0, 0}};
    scenario::ClosestApproach ca;
    double time = 0.0;
    for (int tick = 0; tick < 1000; ++tick) {
      dynamics::ThrusterCommand cmd;
      if (tick % 9 == 2) cmd.set(guidance::kDivertNegY);
      if (tick % 13 == 5) cmd.set(guidance::kDivertPosZ);
      if (tick % 34 == 0) cmd.set(guidance::kPitchPos.a).set(guidance::kPitchPos.b);
      if (tick % 34 == 17) cmd.set(guidance::kPitchNeg.a).set(guidance::kPitchNeg.b);
      if (tick > 150) cmd.reset();
      const bool fine = always_fine || norm(t.r - m.r) < 1000.0;
      const int n = fine ? 299 : 1;
      const double h = 0.02 / n;
      for (int s = 0; s < n; ++s) {
        dynamics::missile_step(m, cmd, table, {0.01, 0.002, -0.003}, mc, g, h);
        t = dynamics::target_step(t, Vec3{}, g, h);
        time += h;
        if (ca.add(time, t.r - m.r, t.v - m.v)) return ca.miss();
      }
    }
    return -1.0;
  };
  const double dual = fly(false);
  const double fine = fly(true);
  REQUIRE(dual >= 0.0);
  MESSAGE("open-loop miss " << dual << " m, fine throughout " << fine << " m");
  CHECK(std::fabs(dual - fine) < 0.01);
}

TEST_CASE("ideal conditions gate") {
  montecarlo::BatchSpec spec;
  spec.episodes = 500;
  spec.seed = 2024;
  spec.workers = 0;
  auto env = ideal_environment();
  const auto sf = no_errors();
  std::vector<EpisodeRecord> recs(spec.episodes);
  parallel_for(spec.episodes, resolve_workers(0), [&](std::size_t i) {
    recs[i] = run_episode(env, sf, derive_seed(spec.seed, i), Mode::Baseline, nullptr).record;
  });
  const auto row = montecarlo::summarize(0, "baseline", recs);
  MESSAGE("ideal hit50 " << row.hit50_pct << "%");
  CHECK(row.hit50_pct >= 90.0);
}
