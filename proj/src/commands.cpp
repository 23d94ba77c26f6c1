#include "sfc/commands.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "sfc/random.hpp"

namespace sfc::commands {

namespace fs = std::filesystem;
using montecarlo::fmt;

namespace {

void write_effective_config(const Invocation& inv) {
  fs::create_directories(inv.out);
  std::ofstream os(inv.out / "effective_config.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (inv.out / "effective_config.json").string());
  os << config::to_json_text(inv.cfg) << '\n';
}

void log_line(const Invocation& inv, const std::string& s) {
  if (inv.log) *inv.log << s << std::endl;
}

std::vector<episode::EpisodeRecord> run_cases(const Invocation& inv, int case_id, episode::Mode mode,
                                              const pcm::PcmParams* params, std::size_t trajectories) {
  montecarlo::BatchSpec spec;
  spec.case_id = case_id;
  spec.episodes = inv.cfg.evaluation.episodes;
  spec.seed = inv.cfg.evaluation.seed;
  spec.mode = mode;
  spec.params = params;
  spec.workers = inv.workers;
  spec.record_trajectories = trajectories;
  return montecarlo::run_batch(inv.cfg.env, spec);
}

void write_curve_csv(const fs::path& path, std::span<const trainer::CurveRow> rows, const montecarlo::CsvMeta& meta,
                     std::size_t window) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# sfc " << meta.command << " config_hash=" << meta.config_hash << " seed=" << meta.seed << "\n";
  os << "# window=" << window << " episodes; losses are mean per-step online sums of squares\n";
  os << "episode,window_hit50_pct,window_hit100_pct,L,L_o,L_eps,mean_fuel_kg\n";
  for (const auto& r : rows)
    os << r.episode << ',' << fmt(r.window_hit50_pct, 2) << ',' << fmt(r.window_hit100_pct, 2) << ','
       << fmt(r.loss, 10) << ',' << fmt(r.loss_obs, 10) << ',' << fmt(r.loss_eps, 12) << ','
       << fmt(r.mean_fuel_kg, 4) << '\n';
}

void write_paired_csv(const fs::path& path, std::span<const PairedRow> rows, const montecarlo::CsvMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# sfc " << meta.command << " config_hash=" << meta.config_hash << " seed=" << meta.seed << "\n";
  os << "# both modes share every episode seed; delta = compensated - baseline\n";
  os << "case,n,hit50_baseline,hit50_compensated,delta_hit50_pp,hit100_baseline,hit100_compensated,"
        "median_miss_baseline_m,median_miss_compensated_m,fuel_baseline_kg,fuel_compensated_kg,"
        "violation_baseline_pct,violation_compensated_pct,estimator_good_pct,mean_loss_ratio,"
        "median_final_err_wx,median_final_err_wy,median_final_err_wz\n";
  for (const auto& r : rows) {
    const auto& b = r.baseline;
    const auto& c = r.compensated;
    os << b.case_id << ',' << b.n << ',' << fmt(b.hit50_pct, 2) << ',' << fmt(c.hit50_pct, 2) << ','
       << fmt(c.hit50_pct - b.hit50_pct, 2) << ',' << fmt(b.hit100_pct, 2) << ',' << fmt(c.hit100_pct, 2) << ','
       << fmt(b.median_miss_m, 4) << ',' << fmt(c.median_miss_m, 4) << ',' << fmt(b.fuel_mu_kg, 4) << ','
       << fmt(c.fuel_mu_kg, 4) << ',' << fmt(b.violation_pct, 2) << ',' << fmt(c.violation_pct, 2) << ','
       << fmt(r.estimator.good_pct, 2) << ',' << fmt(r.estimator.mean_loss_ratio, 6);
    for (double e : r.estimator.median_final_omega_err) os << ',' << fmt(e, 8);
    os << '\n';
  }
}

}  // namespace

fs::path checkpoint_path(const Invocation& inv) {
  return inv.checkpoint.empty() ? inv.out / "pcm_checkpoint.txt" : inv.checkpoint;
}

BaselineSummary baseline(const Invocation& inv) {
  inv.cfg.validate();
  write_effective_config(inv);
  const montecarlo::CsvMeta meta{config::config_hash(inv.cfg), inv.cfg.evaluation.seed, "baseline"};
  BaselineSummary out;
  std::vector<episode::EpisodeRecord> all;
  for (int c : inv.cases) {
    auto recs = run_cases(inv, c, episode::Mode::Baseline, nullptr, 0);
    out.rows.push_back(montecarlo::summarize(c, "baseline", recs));
    const auto& r = out.rows.back();
    log_line(inv, "case " + std::to_string(c) + ": hit50 " + fmt(r.hit50_pct, 1) + "% hit100 " +
                      fmt(r.hit100_pct, 1) + "% fuel " + fmt(r.fuel_mu_kg, 2) + " kg violations " +
                      fmt(r.violation_pct, 1) + "%");
    all.insert(all.end(), recs.begin(), recs.end());
  }
  montecarlo::write_stats_csv(inv.out / "baseline_stats.csv", out.rows, meta);
  montecarlo::write_episodes_csv(inv.out / "baseline_episodes.csv", all, meta);
  return out;
}

TrainSummary train(const Invocation& inv) {
  inv.cfg.validate();
  const auto& tcfg = inv.cfg.training;
  trainer::TrainState state{pcm::PcmParams::random(inv.cfg.pcm, tcfg.init_seed), {}, 0};
  const fs::path ckpt = checkpoint_path(inv);
  if (inv.resume) {
    if (!fs::exists(ckpt)) throw std::runtime_error("cannot resume: checkpoint not found: " + ckpt.string());
    auto loaded = pcm::load_checkpoint(ckpt);
    if (loaded.params.config().fingerprint() != inv.cfg.pcm.fingerprint())
      throw config::ConfigError("checkpoint model configuration does not match the pcm section of the config");
    if (loaded.meta.seed != tcfg.seed)
      throw config::ConfigError("checkpoint was trained with seed " + std::to_string(loaded.meta.seed));
    state.params = std::move(loaded.params);
    state.episodes_done = loaded.meta.episodes;
  }
  write_effective_config(inv);
  const montecarlo::CsvMeta meta{config::config_hash(inv.cfg), tcfg.seed, "train"};
  const auto sf = seeker::ScaleFactorConfig::for_case(tcfg.case_id);
  auto result = trainer::train(inv.cfg.env, sf, tcfg.schedule, tcfg.seed, state, inv.workers,
                               [&](const trainer::CurveRow& r, const trainer::UpdateMetrics& m) {
                                 log_line(inv, "episode " + std::to_string(r.episode) + ": window hit50 " +
                                                   fmt(r.window_hit50_pct, 1) + "% L_o " + fmt(r.loss_obs, 6) +
                                                   " L_eps " + fmt(r.loss_eps, 9) + " update " +
                                                   fmt(m.before.total, 6) + " -> " + fmt(m.after.total, 6));
                               });
  pcm::save_checkpoint(ckpt, state.params, {state.params.config().fingerprint(), state.episodes_done, tcfg.seed});
  write_curve_csv(inv.out / "train_curve.csv", result.curve, meta, tcfg.schedule.window());
  return {std::move(result.curve), state.episodes_done, std::move(state.params)};
}

EstimatorSummary summarize_estimator(std::span<const episode::EpisodeRecord> records) {
  EstimatorSummary s;
  std::array<std::vector<double>, 3> finals;
  std::size_t good = 0;
  double ratio = 0.0;
  for (const auto& r : records) {
    const auto& e = r.estimator;
    if (e.steps == 0) continue;
    ++s.n;
    good += e.loss_eps < 0.5 * e.zero_loss;
    ratio += e.zero_loss > 0.0 ? e.loss_eps / e.zero_loss : 0.0;
    for (int k = 0; k < 3; ++k) finals[k].push_back(e.final_abs_err[2 + k]);
  }
  if (s.n == 0) return s;
  s.good_pct = 100.0 * static_cast<double>(good) / static_cast<double>(s.n);
  s.mean_loss_ratio = ratio / static_cast<double>(s.n);
  for (int k = 0; k < 3; ++k) s.median_final_omega_err[k] = montecarlo::median(finals[k]);
  return s;
}

EvalSummary eval(const Invocation& inv) {
  inv.cfg.validate();
  const fs::path ckpt = checkpoint_path(inv);
  if (!fs::exists(ckpt)) throw std::runtime_error("checkpoint not found: " + ckpt.string());
  auto loaded = pcm::load_checkpoint(ckpt);
  if (loaded.params.config().fingerprint() != inv.cfg.pcm.fingerprint())
    throw config::ConfigError(
        "checkpoint model configuration (hidden size, scales, loss weights) does not match the pcm section of the "
        "config; refusing to evaluate");
  write_effective_config(inv);
  const montecarlo::CsvMeta meta{config::config_hash(inv.cfg), inv.cfg.evaluation.seed, "eval"};

  EvalSummary out;
  std::vector<montecarlo::StatsRow> stats;
  std::vector<episode::EpisodeRecord> all;
  std::size_t remaining = inv.dump_trajectories;
  if (remaining > 0) fs::create_directories(inv.out / "trajectories");
  for (int c : inv.cases) {
    const std::size_t dump = std::min(remaining, inv.cfg.evaluation.episodes);
    remaining -= dump;
    auto base = run_cases(inv, c, episode::Mode::Baseline, nullptr, 0);
    auto comp = run_cases(inv, c, episode::Mode::Compensated, &loaded.params, dump);
    PairedRow row{montecarlo::summarize(c, "baseline", base), montecarlo::summarize(c, "compensated", comp),
                  summarize_estimator(comp)};
    log_line(inv, "case " + std::to_string(c) + ": hit50 " + fmt(row.baseline.hit50_pct, 1) + "% -> " +
                      fmt(row.compensated.hit50_pct, 1) + "%, median miss " + fmt(row.baseline.median_miss_m, 3) +
                      " -> " + fmt(row.compensated.median_miss_m, 3) + " m");
    for (std::size_t i = 0; i < dump; ++i) {
      const fs::path p = inv.out / "trajectories" / ("case" + std::to_string(c) + "_episode" + std::to_string(i) + ".csv");
      montecarlo::write_trajectory_csv(p, comp[i], meta);
      comp[i].trajectory.clear();
    }
    stats.push_back(row.baseline);
    stats.push_back(row.compensated);
    out.rows.push_back(std::move(row));
    all.insert(all.end(), base.begin(), base.end());
    all.insert(all.end(), comp.begin(), comp.end());
  }
  montecarlo::write_stats_csv(inv.out / "eval_stats.csv", stats, meta);
  write_paired_csv(inv.out / "eval_paired.csv", out.rows, meta);
  montecarlo::write_episodes_csv(inv.out / "eval_episodes.csv", all, meta);
  return out;
}

}  // namespace sfc::commands
