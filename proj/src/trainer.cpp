#include "sfc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "sfc/parallel.hpp"
#include "sfc/random.hpp"

namespace sfc::trainer {

bool TrainConfig::valid() const {
  return total_episodes > 0 && update_every > 0 && update_every <= buffer_capacity && segment_length > 0 &&
         passes > 0 && adam.lr > 0.0 && window_fraction > 0.0 && window_fraction <= 1.0;
}

std::size_t TrainConfig::window() const {
  const auto w = static_cast<std::size_t>(std::llround(window_fraction * static_cast<double>(total_episodes)));
  return std::max<std::size_t>(w, 1);
}

void RolloutBuffer::push(episode::EpisodeRollout rollout) {
  episodes_.push_back(std::move(rollout));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::size_t RolloutBuffer::total_steps() const {
  std::size_t n = 0;
  for (const auto& e : episodes_) n += e.steps;
  return n;
}

std::vector<pcm::SegmentView> segments(const episode::EpisodeRollout& r, std::size_t length) {
  std::vector<pcm::SegmentView> out;
  const std::size_t h = r.hidden;
  for (std::size_t start = 0; start < r.steps; start += length) {
    pcm::SegmentView s;
    s.steps = std::min(length, r.steps - start);
    if (start == 0) {
      s.first_obs = r.first_obs;
    } else {
      s.initial_hidden = std::span<const double>(r.hiddens).subspan(start * h, h);
    }
    s.errors = std::span<const double>(r.errors).subspan(start * pcm::kObsDim, s.steps * pcm::kObsDim);
    s.actions = std::span<const double>(r.actions).subspan(start * pcm::kActionDim, s.steps * pcm::kActionDim);
    s.next_obs = std::span<const double>(r.next_obs).subspan(start * pcm::kObsDim, s.steps * pcm::kObsDim);
    s.eps = std::span<const double>(r.eps).subspan(start * pcm::kEpsDim, s.steps * pcm::kEpsDim);
    out.push_back(s);
  }
  return out;
}

namespace {

bool finite(const pcm::LossTerms& l) { return std::isfinite(l.total); }

pcm::LossTerms per_step(pcm::LossTerms l, std::size_t steps) {
  if (steps == 0) return {};
  const double n = static_cast<double>(steps);
  return {l.total / n, l.obs / n, l.eps / n};
}

pcm::LossTerms buffer_loss(const std::vector<pcm::SegmentView>& segs, const pcm::PcmParams& params) {
  pcm::LossTerms sum;
  for (const auto& s : segs) sum += pcm::segment_loss(s, params);
  return sum;
}

}  // namespace

UpdateMetrics update_params(const RolloutBuffer& buffer, pcm::PcmParams& params, pcm::AdamState& adam,
                            const TrainConfig& cfg) {
  if (buffer.empty()) throw std::invalid_argument("update_params: empty rollout buffer");
  if (adam.m.size() != params.size()) adam = pcm::AdamState(adam.cfg, params.size());

  std::vector<pcm::SegmentView> segs;
  for (const auto& ep : buffer.episodes()) {
    if (ep.hidden != params.hidden()) throw std::invalid_argument("update_params: rollout hidden size mismatch");
    auto s = segments(ep, cfg.segment_length);
    segs.insert(segs.end(), s.begin(), s.end());
  }

  UpdateMetrics m;
  m.steps = buffer.total_steps();
  m.segments = segs.size();
  m.before = per_step(buffer_loss(segs, params), m.steps);

  pcm::PcmParams grads(params.config());
  auto step_if_finite = [&](const pcm::LossTerms& l) {
    if (!finite(l) || !grads.all_finite()) {
      ++m.skipped;
      return;
    }
    pcm::PcmParams candidate = params;
    pcm::AdamState candidate_adam = adam;
    pcm::adam_update(candidate, grads, candidate_adam);
    if (!candidate.all_finite()) {
      ++m.skipped;
      return;
    }
    params = std::move(candidate);
    adam = std::move(candidate_adam);
    ++m.adam_steps;
  };

  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    if (cfg.whole_buffer) {
      grads.set_zero();
      pcm::LossTerms l;
      for (const auto& s : segs) l += pcm::backward(s, params, grads);
      step_if_finite(l);
    } else {
      for (const auto& s : segs) {
        grads.set_zero();
        step_if_finite(pcm::backward(s, params, grads));
      }
    }
  }
  m.after = per_step(buffer_loss(segs, params), m.steps);
  return m;
}

CurveRow window_row(std::size_t episode, const std::vector<episode::EpisodeRecord>& records, std::size_t window) {
  CurveRow row;
  row.episode = episode;
  const std::size_t n = std::min(window, records.size());
  if (n == 0) return row;
  std::size_t h50 = 0, h100 = 0, steps = 0;
  double fuel = 0.0, lo = 0.0, le = 0.0;
  for (std::size_t i = records.size() - n; i < records.size(); ++i) {
    const auto& r = records[i];
    h50 += r.hit(0.5);
    h100 += r.hit(1.0);
    fuel += r.fuel_used;
    lo += r.estimator.loss_obs;
    le += r.estimator.loss_eps;
    steps += r.estimator.steps;
  }
  const double dn = static_cast<double>(n);
  row.window_hit50_pct = 100.0 * static_cast<double>(h50) / dn;
  row.window_hit100_pct = 100.0 * static_cast<double>(h100) / dn;
  row.mean_fuel_kg = fuel / dn;
  if (steps > 0) {
    row.loss_obs = lo / static_cast<double>(steps);
    row.loss_eps = le / static_cast<double>(steps);
    row.loss = row.loss_obs + row.loss_eps;
  }
  return row;
}

TrainResult train(const episode::EnvironmentConfig& env, const seeker::ScaleFactorConfig& sf, const TrainConfig& cfg,
                  std::uint64_t seed, TrainState& state, unsigned workers, const Progress& progress) {
  if (!cfg.valid()) throw std::invalid_argument("invalid training schedule");
  if (state.adam.m.size() != state.params.size()) state.adam = pcm::AdamState(cfg.adam, state.params.size());
  state.adam.cfg = cfg.adam;

  TrainResult result;
  RolloutBuffer buffer(cfg.buffer_capacity);
  const std::size_t window = cfg.window();
  episode::EpisodeOptions opts;
  opts.record_rollout = true;

  while (state.episodes_done < cfg.total_episodes) {
    const std::size_t first = state.episodes_done;
    const std::size_t count = std::min(cfg.update_every, cfg.total_episodes - first);
    const pcm::PcmParams frozen = state.params;
    std::vector<episode::EpisodeResult> batch(count);
    parallel_for(count, workers, [&](std::size_t k) {
      const std::size_t i = first + k;
      try {
        batch[k] = episode::run_episode(env, sf, derive_seed(seed, i), episode::Mode::Compensated, &frozen, opts);
      } catch (const std::exception& e) {
        throw std::runtime_error("training episode " + std::to_string(i) + ": " + e.what());
      }
    });
    for (auto& r : batch) {
      result.records.push_back(std::move(r.record));
      buffer.push(std::move(r.rollout));
    }
    state.episodes_done += count;

    const UpdateMetrics m = update_params(buffer, state.params, state.adam, cfg);
    result.updates.push_back(m);
    result.curve.push_back(window_row(state.episodes_done, result.records, window));
    if (progress) progress(result.curve.back(), m);
  }
  return result;
}

}  // namespace sfc::trainer
