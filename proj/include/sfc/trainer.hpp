#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "sfc/episode.hpp"
#include "sfc/pcm.hpp"

namespace sfc::trainer {

struct TrainConfig {
  std::size_t total_episodes = 4000;
  std::size_t update_every = 120;
  std::size_t buffer_capacity = 360;
  std::size_t segment_length = 60;
  std::size_t passes = 1;
  // false: one ADAM step per segment, visiting episodes in buffer order.
  // true: gradients summed over the whole buffer, one ADAM step per pass.
  bool whole_buffer = false;
  pcm::AdamConfig adam;
  double window_fraction = 0.06;  // success-rate window as a share of total_episodes

  bool valid() const;
  std::size_t window() const;
};

/// The most recent episodes' rollouts, oldest first.
class RolloutBuffer {
 public:
  explicit RolloutBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(episode::EpisodeRollout rollout);
  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_steps() const;
  bool empty() const { return episodes_.empty(); }
  const std::deque<episode::EpisodeRollout>& episodes() const { return episodes_; }

 private:
  std::size_t capacity_;
  std::deque<episode::EpisodeRollout> episodes_;
};

/// Splits a rollout into consecutive segments of at most `length` steps. The first
/// segment starts from the episode's first observation; later ones start from the
/// hidden state recorded during the rollout.
std::vector<pcm::SegmentView> segments(const episode::EpisodeRollout& r, std::size_t length);

struct UpdateMetrics {
  pcm::LossTerms before;  // mean per-step losses over the buffer
  pcm::LossTerms after;
  std::size_t steps = 0;
  std::size_t segments = 0;
  std::size_t adam_steps = 0;
  std::size_t skipped = 0;  // segments or passes dropped for a non-finite loss or gradient
};

UpdateMetrics update_params(const RolloutBuffer& buffer, pcm::PcmParams& params, pcm::AdamState& adam,
                            const TrainConfig& cfg);

struct CurveRow {
  std::size_t episode = 0;  // episodes completed
  double window_hit50_pct = 0.0;
  double window_hit100_pct = 0.0;
  double loss = 0.0;  // mean per-step online losses over the window
  double loss_obs = 0.0;
  double loss_eps = 0.0;
  double mean_fuel_kg = 0.0;
};

/// Rolling window statistics over the last `window` records.
CurveRow window_row(std::size_t episode, const std::vector<episode::EpisodeRecord>& records, std::size_t window);

struct TrainState {
  pcm::PcmParams params;
  pcm::AdamState adam;
  std::size_t episodes_done = 0;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  std::vector<episode::EpisodeRecord> records;  // one per episode run in this call, in order
  std::vector<UpdateMetrics> updates;
};

using Progress = std::function<void(const CurveRow&, const UpdateMetrics&)>;

/// Runs episodes episodes_done .. total_episodes in batches of update_every. Each
/// batch runs in parallel against a frozen copy of the parameters; episode i uses
/// derive_seed(seed, i) so results do not depend on the worker count.
TrainResult train(const episode::EnvironmentConfig& env, const seeker::ScaleFactorConfig& sf, const TrainConfig& cfg,
                  std::uint64_t seed, TrainState& state, unsigned workers, const Progress& progress = {});

}  // namespace sfc::trainer
