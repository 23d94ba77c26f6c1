#include "sfc/episode.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "sfc/stabilization.hpp"

namespace sfc::episode {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::Compensated: return "compensated";
    case Mode::Oracle: return "oracle";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxResamples = 1000;

pcm::Action action_vector(const dynamics::ThrusterCommand& cmd) {
  pcm::Action u{};
  for (std::size_t i = 0; i < pcm::kActionDim; ++i) u[i] = cmd.test(i) ? 1.0 : 0.0;
  return u;
}

bool state_finite(const dynamics::MissileState& m, const dynamics::TargetState& tg) {
  return is_finite(m.r) && is_finite(m.v) && is_finite(m.omega) && std::isfinite(m.q.norm()) &&
         std::isfinite(m.mass) && is_finite(tg.r) && is_finite(tg.v);
}

template <typename Container>
void append(std::vector<double>& dst, const Container& src) {
  dst.insert(dst.end(), std::begin(src), std::end(src));
}

}  // namespace

EpisodeResult run_episode(const EnvironmentConfig& env, const seeker::ScaleFactorConfig& sf, std::uint64_t seed,
                          Mode mode, const pcm::PcmParams* params, const EpisodeOptions& opts) {
  if (mode == Mode::Compensated && params == nullptr) throw std::invalid_argument("compensated mode needs a model");
  EpisodeResult result;
  EpisodeRecord& rec = result.record;
  rec.seed = seed;
  rec.case_id = sf.case_id;
  rec.mode = mode;

  Rng rng(seed);
  scenario::ScenarioDraw draw = scenario::sample_scenario(env.scenario, rng);
  auto engagement = scenario::init_engagement(draw, env.scenario, env.missile, env.gravity);
  while (!engagement) {
    if (++rec.resamples > kMaxResamples) throw std::runtime_error("no feasible engagement geometry");
    draw = scenario::sample_scenario(env.scenario, rng);
    engagement = scenario::init_engagement(draw, env.scenario, env.missile, env.gravity);
  }
  rec.maneuver = draw.maneuver;
  const seeker::ScaleFactorDraw sf_draw = seeker::sample_scale_factors(sf, rng);

  dynamics::MissileState missile = engagement->missile;
  dynamics::TargetState target = engagement->target;
  const Vec3 r_com_final = engagement->r_com_final;
  const auto& thrusters = dynamics::default_thrusters();
  const dynamics::TargetAccel target_accel = [&draw](double t, const Vec3& v) {
    return scenario::target_accel_command(draw, t, v);
  };
  const scenario::TerminationLimits limits{env.omega_max, env.missile.dry_mass, env.max_time};

  guidance::Policy policy(env.guidance);
  {
    const Vec3 rel = target.r - missile.r;
    const double range = norm(rel);
    const double closing = env.guidance.closing_speed_source == guidance::ClosingSpeedSource::LaunchCue
                               ? -dot(rel, target.v - missile.v) / range
                               : guidance::closing_speed_estimate(env.scenario.missile_speed, env.scenario.target_speed);
    policy.reset(range, closing, missile.mass, thrusters);
  }

  const bool use_pcm = mode == Mode::Compensated;
  const double step_dt = env.step_dt();
  seeker::AngleFilter filter;
  seeker::Measurement meas = seeker::observe(missile, target, sf_draw, env.seeker, filter, rng, env.nav_dt);

  pcm::PcmState pstate;
  EpisodeRollout& roll = result.rollout;
  if (use_pcm) {
    pstate = pcm::initial_state(meas.obs.as_array(), *params);
    if (opts.record_rollout) {
      roll.first_obs = meas.obs.as_array();
      roll.hidden = params->hidden();
    }
  }

  pcm::Vec5 eps_hat{};
  if (mode == Mode::Oracle) eps_hat = meas.eps;
  auto comp = stabilization::compensate(meas.obs, eps_hat, env.max_abs_eps);
  rec.clamp_events += comp.clamped;
  stabilization::StabilizerState stab_state;
  Quat dq_lagged = stab_state.dq;
  auto stab = stabilization::stabilize(comp.obs.theta_u, comp.obs.theta_v, dq_lagged);
  policy.observe(0.0, stab.theta_u, stab.theta_v);
  Vec3 prev_omega = comp.obs.omega;

  auto log_row = [&](double t, const dynamics::ThrusterCommand& cmd) {
    if (!opts.record_trajectory) return;
    TrajectoryRow row;
    row.t = t;
    row.theta_u_meas = meas.obs.theta_u;
    row.theta_v_meas = meas.obs.theta_v;
    row.theta_u_stab = stab.theta_u;
    row.theta_v_stab = stab.theta_v;
    row.eps_true = meas.eps;
    row.eps_hat = eps_hat;
    row.omega = missile.omega;
    row.fuel_kg = missile.mass - env.missile.dry_mass;
    row.thrusters = cmd;
    rec.trajectory.push_back(row);
  };

  scenario::ClosestApproach approach;
  approach.add(0.0, target.r - missile.r, target.v - missile.v);
  scenario::Termination term =
      scenario::check_termination({meas.fov_exceeded, missile.omega, missile.mass, false, true, 0.0}, limits);
  log_row(0.0, {});

  const std::size_t final_window_steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.final_window / step_dt)));
  std::deque<pcm::Vec5> recent_abs_err;

  double t = 0.0;
  std::size_t step = 0;
  while (term == scenario::Termination::None) {
    const double t_step = static_cast<double>(step) * step_dt;
    guidance::GuidanceInput gin{t_step, stab.theta_u, stab.theta_v, comp.obs.theta_u, comp.obs.theta_v,
                                comp.obs.omega, stab_state.dq};
    const dynamics::ThrusterCommand cmd = policy.command(gin, step_dt);
    const pcm::Action u = action_vector(cmd);

    pcm::Vec5 error_in{};
    pcm::Vec5 pred_obs{};
    if (use_pcm) {
      error_in = pstate.error;
      if (opts.record_rollout) append(roll.hiddens, pstate.h);
      const auto out = pcm::forward_step(error_in, u, pstate, *params);
      pred_obs = out.pred_obs;
      eps_hat = out.eps_hat;
    }

    const Vec3 rel = target.r - missile.r;
    const double closing = -dot(rel, target.v - missile.v) / std::max(norm(rel), 1e-9);
    const bool fine = env.force_fine || norm(rel) - closing * step_dt < env.fine_range;
    const int substeps = fine ? env.fine_substeps : 1;
    const double h = env.nav_dt / substeps;

    bool measured = false;
    for (int tick = 0; tick < env.nav_ticks_per_step && term == scenario::Termination::None; ++tick) {
      const double t_tick = t_step + tick * env.nav_dt;
      for (int s = 0; s < substeps; ++s) {
        const double t0 = t_tick + s * h;
        dynamics::missile_step(missile, cmd, thrusters, r_com_final, env.missile, env.gravity, h);
        target = dynamics::target_step(target, target_accel, t0, env.gravity, h);
        t = t_tick + (s + 1) * h;
        const bool passed = approach.add(t, target.r - missile.r, target.v - missile.v);
        term = scenario::check_termination(
            {false, missile.omega, missile.mass, passed, state_finite(missile, target), t}, limits);
        if (term != scenario::Termination::None) break;
      }
      if (term != scenario::Termination::None) break;

      meas = seeker::observe(missile, target, sf_draw, env.seeker, filter, rng, env.nav_dt);
      measured = tick + 1 == env.nav_ticks_per_step;
      if (mode == Mode::Oracle) eps_hat = meas.eps;
      comp = stabilization::compensate(meas.obs, eps_hat, env.max_abs_eps);
      rec.clamp_events += comp.clamped;
      stab_state = stabilization::integrate_dq(stab_state, prev_omega, comp.obs.omega, env.nav_dt);
      prev_omega = comp.obs.omega;
      dq_lagged = stabilization::lag_attitude(dq_lagged, stab_state.dq, env.nav_dt, env.seeker.tau_theta);
      stab = stabilization::stabilize(comp.obs.theta_u, comp.obs.theta_v, dq_lagged);
      policy.observe(t, stab.theta_u, stab.theta_v);
      log_row(t, cmd);
      term = scenario::check_termination({meas.fov_exceeded, missile.omega, missile.mass, false, true, t}, limits);
    }
    ++step;

    if (use_pcm && measured) {
      const pcm::Vec5 o_next = meas.obs.as_array();
      pcm::Vec5 abs_err{};
      EstimatorStats& es = rec.estimator;
      for (std::size_t i = 0; i < pcm::kObsDim; ++i) {
        pstate.error[i] = pred_obs[i] - o_next[i];
        es.loss_obs += pstate.error[i] * pstate.error[i];
        const double d = eps_hat[i] - meas.eps[i];
        es.loss_eps += d * d;
        es.zero_loss += meas.eps[i] * meas.eps[i];
        abs_err[i] = std::fabs(d);
      }
      ++es.steps;
      recent_abs_err.push_back(abs_err);
      if (recent_abs_err.size() > final_window_steps) recent_abs_err.pop_front();
      if (opts.record_rollout) {
        append(roll.actions, u);
        append(roll.errors, error_in);
        append(roll.next_obs, o_next);
        append(roll.eps, meas.eps);
        ++roll.steps;
      }
    } else if (use_pcm && opts.record_rollout && roll.hiddens.size() > roll.steps * roll.hidden) {
      // Terminated before the step's observation arrived; drop the partial entry.
      roll.hiddens.resize(roll.steps * roll.hidden);
    }
  }

  rec.termination = term;
  rec.steps = step;
  rec.duration = t;
  rec.fuel_used = env.missile.wet_mass - missile.mass;
  rec.miss = term == scenario::Termination::Completed ? approach.miss() : norm(target.r - missile.r);
  if (!recent_abs_err.empty()) {
    EstimatorStats& es = rec.estimator;
    es.final_steps = recent_abs_err.size();
    for (const auto& a : recent_abs_err)
      for (std::size_t i = 0; i < pcm::kObsDim; ++i) es.final_abs_err[i] += a[i];
    for (double& v : es.final_abs_err) v /= static_cast<double>(es.final_steps);
  }
  return result;
}

}  // namespace sfc::episode
