#include "doctest.h"

#include <cmath>

#include "sfc/trainer.hpp"

using namespace sfc;
using namespace sfc::trainer;

namespace {

pcm::PcmConfig model_config() {
  pcm::PcmConfig c;
  c.hidden = 16;
  c.obs_scale = {0.3, 0.3, 1, 1, 1};
  c.error_scale = {2e-3, 2e-3, 2e-2, 2e-2, 2e-2};
  c.eps_scale = {1e-2, 1e-2, 1e-2, 1e-2, 1e-2};
  return c;
}

episode::EpisodeResult recorded_episode(const pcm::PcmParams& p, std::uint64_t seed) {
  episode::EpisodeOptions o;
  o.record_rollout = true;
  return episode::run_episode({}, seeker::ScaleFactorConfig::for_case(3), seed, episode::Mode::Compensated, &p, o);
}

episode::EpisodeRollout zero_rollout(std::size_t steps, std::size_t hidden) {
  episode::EpisodeRollout r;
  r.steps = steps;
  r.hidden = hidden;
  r.actions.assign(steps * pcm::kActionDim, 0.0);
  r.errors.assign(steps * 5, 0.0);
  r.hiddens.assign(steps * hidden, 0.0);
  r.next_obs.assign(steps * 5, 0.0);
  r.eps.assign(steps * 5, 0.0);
  return r;
}

}  // namespace

TEST_CASE("rollout buffer keeps the most recent episodes in order") {
  RolloutBuffer b(360);
  for (std::size_t i = 0; i < 361; ++i) b.push(zero_rollout(i % 5 + 1, 2));
  CHECK(b.size() == 360);
  // Episode 0 (one step) is gone; episode 1 (two steps) is now the oldest.
  CHECK(b.episodes().front().steps == 2);
  CHECK(b.episodes().back().steps == 361 % 5);
}

TEST_CASE("segments split episodes without overlap") {
  auto r = zero_rollout(130, 3);
  for (std::size_t i = 0; i < r.hiddens.size(); ++i) r.hiddens[i] = static_cast<double>(i);
  const auto segs = segments(r, 60);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].steps == 60);
  CHECK(segs[2].steps == 10);
  CHECK(segs[0].first_obs.size() == 5);
  CHECK(segs[1].first_obs.empty());
  CHECK(segs[1].initial_hidden[0] == 60.0 * 3);
  CHECK(segs[2].errors.data() == r.errors.data() + 120 * 5);
}

TEST_CASE("zero data and zero parameters give zero loss and no change") {
  auto cfg = model_config();
  pcm::PcmParams p(cfg);
  p.set_zero();
  const auto before = p;
  RolloutBuffer b(4);
  for (int i = 0; i < 3; ++i) b.push(zero_rollout(70, cfg.hidden));
  TrainConfig tc;
  pcm::AdamState a(tc.adam, p.size());
  const auto m = update_params(b, p, a, tc);
  CHECK(m.before.total == 0.0);
  CHECK(m.after.total == 0.0);
  CHECK(m.segments == 6);
  CHECK(p == before);
}

TEST_CASE("recorded rollouts replay exactly through the model") {
  const auto p = pcm::PcmParams::random(model_config(), 3);
  const auto res = recorded_episode(p, 5);
  const auto& r = res.rollout;
  REQUIRE(r.steps > 10);
  REQUIRE(r.steps == res.record.estimator.steps);
  CHECK(r.steps + 1 >= res.record.steps);

  pcm::PcmState s = pcm::initial_state(r.first_obs, p);
  pcm::Vec5 e{};
  for (std::size_t t = 0; t < r.steps; ++t) {
    for (std::size_t i = 0; i < r.hidden; ++i) REQUIRE(s.h[i] == r.hiddens[t * r.hidden + i]);
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(e[i] == r.errors[t * 5 + i]);
    pcm::Action u;
    std::copy_n(r.actions.begin() + static_cast<std::ptrdiff_t>(t * pcm::kActionDim), pcm::kActionDim, u.begin());
    const auto out = pcm::forward_step(e, u, s, p);
    for (std::size_t i = 0; i < 5; ++i) e[i] = out.pred_obs[i] - r.next_obs[t * 5 + i];
  }

  pcm::LossTerms replay;
  for (const auto& seg : segments(r, 60)) replay += pcm::segment_loss(seg, p);
  CHECK(replay.obs == doctest::Approx(res.record.estimator.loss_obs).epsilon(1e-12));
  CHECK(replay.eps == doctest::Approx(res.record.estimator.loss_eps).epsilon(1e-12));
}

TEST_CASE("recording a rollout does not change the episode") {
  const auto p = pcm::PcmParams::random(model_config(), 3);
  const auto with = recorded_episode(p, 6).record;
  const auto without =
      episode::run_episode({}, seeker::ScaleFactorConfig::for_case(3), 6, episode::Mode::Compensated, &p).record;
  CHECK(with.miss == without.miss);
  CHECK(with.fuel_used == without.fuel_used);
  CHECK(with.steps == without.steps);
  CHECK(with.estimator.loss_eps == without.estimator.loss_eps);
}

TEST_CASE("training overfits a single episode") {
  auto cfg = model_config();
  cfg.hidden = 32;
  auto p = pcm::PcmParams::random(cfg, 3);
  const auto res = recorded_episode(p, 5);
  RolloutBuffer b(1);
  b.push(res.rollout);
  TrainConfig tc;
  tc.adam.lr = 1e-3;
  tc.segment_length = 1000;
  pcm::AdamState a(tc.adam, p.size());
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto m = update_params(b, p, a, tc);
    if (i == 0) first = m.before.total;
    last = m.after.total;
  }
  CHECK(first > 0.0);
  CHECK(last < 0.1 * first);
}

TEST_CASE("schedule") {
  TrainConfig tc;
  CHECK(tc.valid());
  CHECK(tc.window() == 240);
  tc.total_episodes = 20000;
  tc.window_fraction = 0.06;
  CHECK(tc.window() == 1200);
  tc.update_every = 0;
  CHECK(!tc.valid());
}

TEST_CASE("one update when the run is exactly one batch") {
  TrainConfig tc;
  tc.total_episodes = 4;
  tc.update_every = 4;
  tc.buffer_capacity = 8;
  TrainState st{pcm::PcmParams::random(model_config(), 1), {}, 0};
  const auto res = train({}, seeker::ScaleFactorConfig::for_case(3), tc, 2, st, 1);
  CHECK(res.updates.size() == 1);
  CHECK(res.records.size() == 4);
  CHECK(res.curve.size() == 1);
  CHECK(st.episodes_done == 4);
  CHECK(res.updates.front().adam_steps > 0);
}

TEST_CASE("training results do not depend on the worker count") {
  TrainConfig tc;
  tc.total_episodes = 6;
  tc.update_every = 3;
  tc.buffer_capacity = 6;
  auto run = [&](unsigned workers) {
    TrainState st{pcm::PcmParams::random(model_config(), 1), {}, 0};
    train({}, seeker::ScaleFactorConfig::for_case(3), tc, 4, st, workers);
    return st.params;
  };
  CHECK(run(1) == run(3));
}
