#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sfc/episode.hpp"

namespace sfc::montecarlo {

struct BatchSpec {
  int case_id = 3;
  std::size_t episodes = 100;
  std::uint64_t seed = 1;
  episode::Mode mode = episode::Mode::Baseline;
  const pcm::PcmParams* params = nullptr;
  unsigned workers = 1;
  std::size_t record_trajectories = 0;  // first k episodes keep their trajectory log
};

/// Episode i uses derive_seed(seed, i); records come back in index order.
std::vector<episode::EpisodeRecord> run_batch(const episode::EnvironmentConfig& env, const BatchSpec& spec);

struct StatsRow {
  int case_id = 0;
  std::string mode;
  std::size_t n = 0;
  double hit50_pct = 0.0;
  double hit100_pct = 0.0;
  double fuel_mu_kg = 0.0;
  double fuel_sigma_kg = 0.0;  // population standard deviation
  double violation_pct = 0.0;
  double mean_miss_m = 0.0;
  double median_miss_m = 0.0;
};

StatsRow summarize(int case_id, std::string mode, std::span<const episode::EpisodeRecord> records);

/// Population mean and standard deviation.
std::pair<double, double> mean_and_sigma(std::span<const double> xs);
double median(std::vector<double> xs);

struct CsvMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;
};

void write_stats_csv(const std::filesystem::path& path, std::span<const StatsRow> rows, const CsvMeta& meta);
void write_episodes_csv(const std::filesystem::path& path, std::span<const episode::EpisodeRecord> records,
                        const CsvMeta& meta);
void write_trajectory_csv(const std::filesystem::path& path, const episode::EpisodeRecord& record,
                          const CsvMeta& meta);

/// Fixed-precision decimal rendering used by every CSV writer.
std::string fmt(double v, int precision = 6);

}  // namespace sfc::montecarlo
