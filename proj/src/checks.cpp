#include "sfc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "sfc/dynamics.hpp"
#include "sfc/guidance.hpp"
#include "sfc/random.hpp"
#include "sfc/seeker.hpp"
#include "sfc/stabilization.hpp"

namespace sfc::checks {

namespace fs = std::filesystem;

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

std::string pct(double v) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << v << '%';
  return os.str();
}

Vec3 angular_momentum_inertial(const dynamics::MissileState& s, const dynamics::MissileConfig& cfg) {
  return dcm_from_quat(s.q).transposed() * (dynamics::inertia_tensor(s.mass, cfg) * s.omega);
}

}  // namespace

CheckResult numerics() {
  CheckResult r{"numerics", true, ""};
  const dynamics::MissileConfig cfg;
  dynamics::GravityModel gravity;
  gravity.mode = dynamics::GravityMode::Off;
  const auto& table = dynamics::default_thrusters();

  // Torque-free tumbling: norm drift per step and angular momentum over 1 s.
  dynamics::MissileState s;
  s.omega = {3.0, -1.5, 2.0};
  s.q = quat_from_axis_angle(normalized(Vec3{1, 2, 3}), 0.7);
  const Vec3 h0 = angular_momentum_inertial(s, cfg);
  const double dt = 0.02 / 299.0;
  double worst_norm = 0.0;
  for (int i = 0; i < 299 * 50; ++i) {
    dynamics::missile_step(s, {}, table, {}, cfg, gravity, dt);
    worst_norm = std::max(worst_norm, std::fabs(s.q.norm() - 1.0));
  }
  const double h_rel = norm(angular_momentum_inertial(s, cfg) - h0) / norm(h0);
  const bool ok_norm = worst_norm < 1e-9;
  const bool ok_h = h_rel < 1e-6;

  // Single RK4 attitude step at constant rate against the exact rotation.
  double worst_closed = 0.0;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 w{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Quat q0 = quat_from_axis_angle(normalized(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0}),
                                         rng.uniform(0, 3));
    const double step = 0.02;
    const double angle = norm(w) * step;
    const Vec3 axis = normalized(w);
    const double sh = std::sin(0.5 * angle);
    const Quat exact = q0 * Quat{std::cos(0.5 * angle), axis.x * sh, axis.y * sh, axis.z * sh};
    worst_closed = std::max(worst_closed, attitude_angle_between(dynamics::quaternion_step(q0, w, step), exact));
  }
  const bool ok_closed = worst_closed < 1e-6;

  // Thruster wrench per firing group, about the geometric center.
  struct Expected {
    std::initializer_list<int> ids;
    Vec3 force;
    Vec3 torque;
  };
  const Expected expected[] = {
      {{0}, {0, -5000, 0}, {0, 0, 0}},        {{1}, {0, 5000, 0}, {0, 0, 0}},
      {{2}, {0, 0, 5000}, {0, 0, 0}},         {{3}, {0, 0, -5000}, {0, 0, 0}},
      {{4, 5}, {0, 0, 0}, {-62.5, 0, 0}},     {{6, 7}, {0, 0, 0}, {62.5, 0, 0}},
      {{8, 9}, {0, 0, 0}, {0, 125, 0}},       {{10, 11}, {0, 0, 0}, {0, -125, 0}},
      {{12, 13}, {0, 0, 0}, {0, 0, -125}},    {{14, 15}, {0, 0, 0}, {0, 0, 125}},
  };
  bool ok_table = true;
  for (const auto& e : expected) {
    dynamics::ThrusterCommand cmd;
    for (int id : e.ids) cmd.set(id);
    const auto w = dynamics::thruster_wrench(cmd, table, {});
    ok_table = ok_table && w.force == e.force && w.torque == e.torque;
  }

  r.pass = ok_norm && ok_h && ok_closed && ok_table;
  r.detail = "max |norm-1| " + sci(worst_norm) + ", momentum drift " + sci(h_rel) + " over 1 s, rk4 vs closed form " +
             sci(worst_closed) + " rad, thruster table " + (ok_table ? "exact" : "MISMATCH");
  return r;
}

CheckResult gradient(std::uint64_t seed, std::size_t samples) {
  pcm::PcmConfig cfg;
  cfg.hidden = 8;
  cfg.obs_scale = {0.3, 0.3, 1.0, 1.0, 1.0};
  cfg.error_scale = {2e-3, 2e-3, 2e-2, 2e-2, 2e-2};
  cfg.eps_scale = {1e-2, 1e-2, 1e-2, 1e-2, 1e-2};
  cfg.obs_weight = {1e2, 1e2, 1.0, 1.0, 1.0};
  cfg.eps_weight = {1e3, 1e3, 1e3, 1e3, 1e3};
  const pcm::PcmParams base = pcm::PcmParams::random(cfg, seed);

  Rng rng(seed ^ 0xabcdefULL);
  const std::size_t steps = 12;
  auto fill = [&](std::size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(0.0, scale);
    return v;
  };
  std::vector<double> first_obs = fill(5, 0.3);
  std::vector<double> init_h = fill(cfg.hidden, 0.5);
  std::vector<double> errors = fill(steps * 5, 3e-3);
  std::vector<double> actions(steps * pcm::kActionDim);
  for (double& a : actions) a = rng.uniform() < 0.3 ? 1.0 : 0.0;
  std::vector<double> next_obs = fill(steps * 5, 0.3);
  std::vector<double> eps = fill(steps * 5, 5e-3);

  // One segment that starts an episode and one that resumes from a stored state.
  pcm::SegmentView a{steps, first_obs, {}, errors, actions, next_obs, eps};
  pcm::SegmentView b{steps, {}, init_h, errors, actions, next_obs, eps};
  auto total_loss = [&](const pcm::PcmParams& p) { return pcm::segment_loss(a, p).total + pcm::segment_loss(b, p).total; };

  pcm::PcmParams grads(cfg);
  pcm::backward(a, base, grads);
  pcm::backward(b, base, grads);

  // Every tensor gets at least one sample; the rest are spread uniformly.
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < pcm::kTensorCount; ++t) {
    const auto& info = base.info(static_cast<pcm::Tensor>(t));
    idx.push_back(info.offset + static_cast<std::size_t>(rng.uniform() * static_cast<double>(info.size())));
  }
  while (idx.size() < samples) idx.push_back(static_cast<std::size_t>(rng.uniform() * static_cast<double>(base.size())));

  const double delta = 1e-5;
  std::size_t good = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t i = idx[k];
    pcm::PcmParams plus = base, minus = base;
    plus.flat()[i] += delta;
    minus.flat()[i] -= delta;
    const double numeric = (total_loss(plus) - total_loss(minus)) / (2.0 * delta);
    const double analytic = grads.flat()[i];
    const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
    const double rel = std::fabs(numeric - analytic) / denom;
    worst = std::max(worst, rel);
    good += rel < 1e-4;
  }
  CheckResult r{"gradient", good + samples / 100 >= samples, ""};
  r.detail = std::to_string(good) + "/" + std::to_string(samples) + " parameters within 1e-4 relative error, worst " +
             sci(worst);
  return r;
}

namespace {

// Body rate of the scripted profiles.
Vec3 scripted_rate(double t, bool coning) {
  if (!coning) return {1.0, 0.0, 0.0};
  return {1.0, 0.3 * std::sin(0.7 * t), 0.3 * std::cos(0.5 * t)};
}

// Flies the profile for `duration` seconds at 50 Hz with exact attitude truth and
// returns the largest stabilized-angle error at the final sample.
double stabilized_error(const Vec3& eps_omega, const Vec3& eps_hat_omega, bool coning, double duration) {
  const double dt = 0.02;
  const int fine = 200;
  const Vec3 los_n = normalized(Vec3{1.0, 0.12, -0.07});
  Quat q;  // body attitude; N' is the body frame at t = 0
  const Quat q0 = q;
  const Vec3 los_ref = dcm_from_quat(q0) * los_n;
  const double u_ref = std::asin(los_ref.y), v_ref = std::asin(los_ref.z);

  seeker::Vec5 eps_hat{0, 0, eps_hat_omega.x, eps_hat_omega.y, eps_hat_omega.z};
  auto measure = [&](double t) {
    const Vec3 lb = dcm_from_quat(q) * los_n;
    seeker::Observation o;
    o.theta_u = std::asin(lb.y);
    o.theta_v = std::asin(lb.z);
    o.omega = hadamard(Vec3{1 + eps_omega.x, 1 + eps_omega.y, 1 + eps_omega.z}, scripted_rate(t, coning));
    return stabilization::compensate(o, eps_hat).obs;
  };

  stabilization::StabilizerState st;
  auto prev = measure(0.0);
  const int ticks = static_cast<int>(std::lround(duration / dt));
  stabilization::StabilizedAngles out;
  for (int k = 0; k < ticks; ++k) {
    const double t0 = k * dt;
    const double h = dt / fine;
    for (int s = 0; s < fine; ++s)
      q = dynamics::quaternion_step(q, scripted_rate(t0 + s * h, coning), scripted_rate(t0 + (s + 1) * h, coning), h);
    const auto now = measure(t0 + dt);
    st = stabilization::integrate_dq(st, prev.omega, now.omega, dt);
    prev = now;
    out = stabilization::stabilize(now.theta_u, now.theta_v, st.dq);
  }
  return std::max(std::fabs(out.theta_u - u_ref), std::fabs(out.theta_v - v_ref));
}

}  // namespace

CheckResult stabilization() {
  const double identity = stabilized_error({}, {}, true, 10.0);
  const Vec3 eps{5e-3, 5e-3, 5e-3};
  const double uncompensated = stabilized_error(eps, {}, false, 10.0);
  const double compensated = stabilized_error(eps, eps, false, 10.0);
  CheckResult r{"stabilization identity", identity < 1e-4 && uncompensated >= 10.0 * compensated, ""};
  r.detail = "identity error " + sci(identity) + " rad after 10 s; roll profile error " + sci(uncompensated) +
             " uncompensated vs " + sci(compensated) + " compensated";
  return r;
}

CheckResult estimator_learning(const commands::EstimatorSummary& s) {
  const auto& m = s.median_final_omega_err;
  const bool a = s.good_pct >= 70.0;
  const bool b = m[0] < 2e-3 && m[1] < 2e-3 && m[2] < 2e-3;
  CheckResult r{"estimator learning", a && b, ""};
  r.detail = "(a) " + pct(s.good_pct) + " of " + std::to_string(s.n) + " held-out episodes below half the zero loss " +
             "(need 70%), mean L_eps/zero " + sci(s.mean_loss_ratio) + "; (b) median final |err| " + sci(m[0]) + " " +
             sci(m[1]) + " " + sci(m[2]) + " (need < 2e-3)";
  return r;
}

CheckResult compensation_benefit(const commands::PairedRow& case3, const commands::PairedRow& case4) {
  auto fails = std::string();
  for (const auto* row : {&case3, &case4}) {
    const auto& b = row->baseline;
    const auto& c = row->compensated;
    const std::string tag = " case " + std::to_string(b.case_id);
    if (!(c.median_miss_m < b.median_miss_m)) fails += tag + " median miss";
    if (!(c.violation_pct <= b.violation_pct)) fails += tag + " violations";
    if (!(c.fuel_mu_kg < b.fuel_mu_kg)) fails += tag + " fuel";
  }
  const double gain = case4.compensated.hit50_pct - case4.baseline.hit50_pct;
  if (!(gain >= 10.0)) fails += " case 4 hit50 gain";
  CheckResult r{"compensation benefit", fails.empty(), ""};
  std::ostringstream os;
  os.precision(3);
  for (const auto* row : {&case3, &case4}) {
    const auto& b = row->baseline;
    const auto& c = row->compensated;
    os << "case " << b.case_id << ": hit50 " << pct(b.hit50_pct) << " -> " << pct(c.hit50_pct) << ", median miss "
       << b.median_miss_m << " -> " << c.median_miss_m << " m, fuel " << b.fuel_mu_kg << " -> " << c.fuel_mu_kg
       << " kg, violations " << pct(b.violation_pct) << " -> " << pct(c.violation_pct) << "; ";
  }
  r.detail = os.str() + (fails.empty() ? "all conditions met" : "failed:" + fails);
  return r;
}

CheckResult trend(const montecarlo::StatsRow& base0, const commands::PairedRow& case3,
                  const commands::PairedRow& case4) {
  const double b0 = base0.hit50_pct, b3 = case3.baseline.hit50_pct, b4 = case4.baseline.hit50_pct;
  const double c3 = case3.compensated.hit50_pct, c4 = case4.compensated.hit50_pct;
  const bool monotone = b0 >= b3 && b3 >= b4;
  const bool smaller_drop = (c3 - c4) < (b3 - b4);
  CheckResult r{"trend", monotone && smaller_drop, ""};
  r.detail = "baseline hit50 " + pct(b0) + " / " + pct(b3) + " / " + pct(b4) + " (cases 0/3/4); drop 3->4 " +
             pct(b3 - b4) + " uncompensated vs " + pct(c3 - c4) + " compensated";
  return r;
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Relative paths of every regular file under `root`, sorted.
std::vector<fs::path> listing(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

CheckResult determinism(const config::RunConfig& cfg, const fs::path& dir, unsigned workers) {
  config::RunConfig small = cfg;
  small.evaluation.episodes = 6;
  small.training.schedule.total_episodes = 8;
  small.training.schedule.update_every = 4;
  small.training.schedule.buffer_capacity = 8;

  const unsigned worker_counts[2] = {1, std::max(2u, workers)};
  for (int run = 0; run < 2; ++run) {
    commands::Invocation inv;
    inv.cfg = small;
    inv.workers = worker_counts[run];
    inv.out = dir / ("run" + std::to_string(run));
    fs::remove_all(inv.out);
    inv.cases = {0, 4};
    commands::baseline(inv);
    commands::train(inv);
    inv.cases = {3};
    inv.dump_trajectories = 2;
    commands::eval(inv);
  }
  const auto files_a = listing(dir / "run0");
  const auto files_b = listing(dir / "run1");
  std::size_t identical = 0;
  std::string mismatch;
  if (files_a != files_b) mismatch = "file sets differ";
  for (const auto& f : files_a) {
    if (slurp(dir / "run0" / f) == slurp(dir / "run1" / f))
      ++identical;
    else if (mismatch.empty())
      mismatch = f.string();
  }
  CheckResult r{"determinism", mismatch.empty() && !files_a.empty(), ""};
  r.detail = std::to_string(identical) + "/" + std::to_string(files_a.size()) +
             " output files byte-identical across two runs with " + std::to_string(worker_counts[0]) + " and " +
             std::to_string(worker_counts[1]) + " workers" + (mismatch.empty() ? "" : "; first mismatch: " + mismatch);
  return r;
}

}  // namespace sfc::checks
