#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfc/dynamics.hpp"
#include "sfc/guidance.hpp"
#include "sfc/pcm.hpp"
#include "sfc/scenario.hpp"
#include "sfc/seeker.hpp"

namespace sfc::episode {

struct EnvironmentConfig {
  scenario::ScenarioConfig scenario;
  dynamics::MissileConfig missile;
  dynamics::GravityModel gravity;
  seeker::SeekerConfig seeker;
  guidance::GuidanceConfig guidance;
  double omega_max = 12.0;      // rad/s
  double max_time = 30.0;       // s
  double nav_dt = 0.020;        // s, seeker and dynamics step
  int nav_ticks_per_step = 2;   // guidance/PCM step = nav_dt * ticks
  int fine_substeps = 299;      // per nav tick inside the terminal zone
  double fine_range = 1000.0;   // m
  bool force_fine = false;
  double max_abs_eps = 0.1;     // compensation clip

  double step_dt() const { return nav_dt * nav_ticks_per_step; }
};

enum class Mode {
  Baseline,     // no compensation
  Compensated,  // PCM estimates divide out the scale factors
  Oracle,       // ground-truth scale factors divide out (diagnostic upper bound)
};
std::string_view mode_name(Mode m);

/// Everything one episode contributes to the training buffers.
struct EpisodeRollout {
  pcm::Vec5 first_obs{};
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::vector<double> actions;   // steps x 16
  std::vector<double> errors;    // steps x 5
  std::vector<double> hiddens;   // steps x H, state entering each step
  std::vector<double> next_obs;  // steps x 5
  std::vector<double> eps;       // steps x 5
};

/// Online accuracy of the scale-factor estimate over one episode.
struct EstimatorStats {
  std::size_t steps = 0;
  double loss_eps = 0.0;     // sum over steps of |eps_hat - eps|^2
  double loss_obs = 0.0;     // sum over steps of |o_hat - o|^2
  double zero_loss = 0.0;    // the same sum for a predictor that always outputs zero
  pcm::Vec5 final_abs_err{}; // mean |eps_hat - eps| per component over the final second
  std::size_t final_steps = 0;
};

struct TrajectoryRow {
  double t = 0.0;
  double theta_u_meas = 0.0, theta_v_meas = 0.0;
  double theta_u_stab = 0.0, theta_v_stab = 0.0;
  pcm::Vec5 eps_true{};
  pcm::Vec5 eps_hat{};
  Vec3 omega;
  double fuel_kg = 0.0;  // remaining
  dynamics::ThrusterCommand thrusters;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  int case_id = 0;
  Mode mode = Mode::Baseline;
  double miss = 0.0;       // closest approach if completed, else range at termination
  double fuel_used = 0.0;  // kg
  scenario::Termination termination = scenario::Termination::None;
  double duration = 0.0;   // s
  std::size_t steps = 0;
  std::size_t resamples = 0;
  std::size_t clamp_events = 0;
  scenario::Maneuver maneuver = scenario::Maneuver::None;
  EstimatorStats estimator;
  std::vector<TrajectoryRow> trajectory;

  bool hit(double threshold) const {
    return termination == scenario::Termination::Completed && miss < threshold;
  }
};

struct EpisodeOptions {
  bool record_rollout = false;
  bool record_trajectory = false;
  double final_window = 1.0;  // s, for EstimatorStats::final_abs_err
};

struct EpisodeResult {
  EpisodeRecord record;
  EpisodeRollout rollout;
};

/// Runs one engagement. `params` is required for Mode::Compensated and ignored otherwise.
/// The random stream is consumed identically across modes, so runs that share a seed
/// share the scenario, scale factors and noise sequence.
EpisodeResult run_episode(const EnvironmentConfig& env, const seeker::ScaleFactorConfig& sf, std::uint64_t seed,
                          Mode mode, const pcm::PcmParams* params, const EpisodeOptions& opts = {});

}  // namespace sfc::episode
