#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sfc/config.hpp"
#include "sfc/montecarlo.hpp"
#include "sfc/trainer.hpp"

namespace sfc::commands {

/// A resolved command: configuration with command-line overrides applied, plus
/// the plumbing that does not affect numerical results.
struct Invocation {
  config::RunConfig cfg;
  std::vector<int> cases;                // baseline and eval
  unsigned workers = 1;
  std::filesystem::path out = "out";
  std::filesystem::path checkpoint;      // empty: <out>/pcm_checkpoint.txt
  bool resume = false;                   // train: continue from the checkpoint
  std::size_t dump_trajectories = 0;     // eval: number of trajectory files
  std::ostream* log = nullptr;           // progress lines, may be null
};

std::filesystem::path checkpoint_path(const Invocation& inv);

struct BaselineSummary {
  std::vector<montecarlo::StatsRow> rows;
};

/// Uncompensated Monte Carlo over inv.cases. Writes baseline_stats.csv,
/// baseline_episodes.csv and effective_config.json into inv.out.
BaselineSummary baseline(const Invocation& inv);

struct TrainSummary {
  std::vector<trainer::CurveRow> curve;
  std::size_t episodes_done = 0;
  pcm::PcmParams params;
};

/// Online training on cfg.training.case_id. Writes train_curve.csv, the checkpoint
/// and effective_config.json.
TrainSummary train(const Invocation& inv);

/// Online estimator quality over a set of compensated episodes.
struct EstimatorSummary {
  std::size_t n = 0;
  double good_pct = 0.0;             // episodes with L_eps < 0.5 x zero-predictor loss
  std::array<double, 3> median_final_omega_err{};  // median over episodes of final-second mean |eps_hat - eps|
  double mean_loss_ratio = 0.0;      // mean over episodes of L_eps / zero-predictor loss
};

EstimatorSummary summarize_estimator(std::span<const episode::EpisodeRecord> records);

struct PairedRow {
  montecarlo::StatsRow baseline;
  montecarlo::StatsRow compensated;
  EstimatorSummary estimator;
};

struct EvalSummary {
  std::vector<PairedRow> rows;
};

/// Paired baseline versus compensated Monte Carlo over inv.cases with the
/// checkpointed model. Writes eval_stats.csv, eval_paired.csv, eval_episodes.csv,
/// effective_config.json and, if requested, trajectories/*.csv.
EvalSummary eval(const Invocation& inv);

}  // namespace sfc::commands
