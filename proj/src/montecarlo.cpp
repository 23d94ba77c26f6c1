#include "sfc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "sfc/parallel.hpp"
#include "sfc/random.hpp"

namespace sfc::montecarlo {

std::vector<episode::EpisodeRecord> run_batch(const episode::EnvironmentConfig& env, const BatchSpec& spec) {
  const auto sf = seeker::ScaleFactorConfig::for_case(spec.case_id);
  std::vector<episode::EpisodeRecord> out(spec.episodes);
  parallel_for(spec.episodes, spec.workers, [&](std::size_t i) {
    episode::EpisodeOptions opts;
    opts.record_trajectory = i < spec.record_trajectories;
    out[i] = episode::run_episode(env, sf, derive_seed(spec.seed, i), spec.mode, spec.params, opts).record;
  });
  return out;
}

std::pair<double, double> mean_and_sigma(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mu = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return {mu, std::sqrt(ss / static_cast<double>(xs.size()))};
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

StatsRow summarize(int case_id, std::string mode, std::span<const episode::EpisodeRecord> records) {
  StatsRow row;
  row.case_id = case_id;
  row.mode = std::move(mode);
  row.n = records.size();
  if (records.empty()) return row;
  std::size_t h50 = 0, h100 = 0, viol = 0;
  std::vector<double> fuel, miss;
  fuel.reserve(records.size());
  miss.reserve(records.size());
  for (const auto& r : records) {
    h50 += r.hit(0.5);
    h100 += r.hit(1.0);
    viol += scenario::is_violation(r.termination);
    fuel.push_back(r.fuel_used);
    miss.push_back(r.miss);
  }
  const double n = static_cast<double>(records.size());
  row.hit50_pct = 100.0 * static_cast<double>(h50) / n;
  row.hit100_pct = 100.0 * static_cast<double>(h100) / n;
  row.violation_pct = 100.0 * static_cast<double>(viol) / n;
  std::tie(row.fuel_mu_kg, row.fuel_sigma_kg) = mean_and_sigma(fuel);
  row.mean_miss_m = mean_and_sigma(miss).first;
  row.median_miss_m = median(miss);
  return row;
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  // Print negative zero as zero.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const CsvMeta& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# sfc " << meta.command << " config_hash=" << meta.config_hash << " seed=" << meta.seed << "\n";
  return os;
}

}  // namespace

void write_stats_csv(const std::filesystem::path& path, std::span<const StatsRow> rows, const CsvMeta& meta) {
  auto os = open_csv(path, meta);
  os << "# fuel_sigma_kg is the population standard deviation; misses of violated episodes are the range at "
        "termination\n";
  os << "case,mode,n,hit50_pct,hit100_pct,fuel_mu_kg,fuel_sigma_kg,violation_pct,mean_miss_m,median_miss_m\n";
  for (const auto& r : rows) {
    os << r.case_id << ',' << r.mode << ',' << r.n << ',' << fmt(r.hit50_pct, 2) << ',' << fmt(r.hit100_pct, 2)
       << ',' << fmt(r.fuel_mu_kg, 4) << ',' << fmt(r.fuel_sigma_kg, 4) << ',' << fmt(r.violation_pct, 2) << ','
       << fmt(r.mean_miss_m, 4) << ',' << fmt(r.median_miss_m, 4) << '\n';
  }
}

void write_episodes_csv(const std::filesystem::path& path, std::span<const episode::EpisodeRecord> records,
                        const CsvMeta& meta) {
  auto os = open_csv(path, meta);
  os << "index,case,mode,seed,termination,maneuver,miss_m,fuel_kg,duration_s,steps,clamp_events,loss_eps,"
        "zero_loss\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << i << ',' << r.case_id << ',' << episode::mode_name(r.mode) << ',' << r.seed << ','
       << scenario::termination_name(r.termination) << ',' << scenario::maneuver_name(r.maneuver) << ','
       << fmt(r.miss, 6) << ',' << fmt(r.fuel_used, 6) << ',' << fmt(r.duration, 6) << ',' << r.steps << ','
       << r.clamp_events << ',' << fmt(r.estimator.loss_eps, 10) << ',' << fmt(r.estimator.zero_loss, 10) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const episode::EpisodeRecord& record,
                          const CsvMeta& meta) {
  auto os = open_csv(path, meta);
  os << "# thruster_flags: bit i set when thruster i+1 fires\n";
  os << "t,theta_u_meas,theta_v_meas,theta_u_stab,theta_v_stab,eps_true_u,eps_true_v,eps_true_wx,eps_true_wy,"
        "eps_true_wz,eps_hat_u,eps_hat_v,eps_hat_wx,eps_hat_wy,eps_hat_wz,omega_x,omega_y,omega_z,fuel_kg,"
        "thruster_flags\n";
  for (const auto& row : record.trajectory) {
    os << fmt(row.t, 6) << ',' << fmt(row.theta_u_meas, 9) << ',' << fmt(row.theta_v_meas, 9) << ','
       << fmt(row.theta_u_stab, 9) << ',' << fmt(row.theta_v_stab, 9);
    for (double e : row.eps_true) os << ',' << fmt(e, 9);
    for (double e : row.eps_hat) os << ',' << fmt(e, 9);
    os << ',' << fmt(row.omega.x, 9) << ',' << fmt(row.omega.y, 9) << ',' << fmt(row.omega.z, 9) << ','
       << fmt(row.fuel_kg, 6) << ',' << row.thrusters.to_ulong() << '\n';
  }
}

}  // namespace sfc::montecarlo
