#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "sfc/episode.hpp"
#include "sfc/pcm.hpp"
#include "sfc/trainer.hpp"

namespace sfc::config {

/// Bad configuration or command-line input; maps to the validation exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingSection {
  int case_id = 3;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 11;  // parameter initialization
  trainer::TrainConfig schedule;
};

struct EvaluationSection {
  std::size_t episodes = 500;
  std::uint64_t seed = 20240601;
};

/// Model scales and loss weights used by the commands. Inputs and heads are brought
/// to O(1); the weights balance angle, rate and scale-factor residuals, whose raw
/// magnitudes differ by several orders.
inline pcm::PcmConfig default_model() {
  pcm::PcmConfig c;
  c.obs_scale = {0.3, 0.3, 1.0, 1.0, 1.0};
  c.error_scale = {1e-2, 1e-2, 0.3, 0.3, 0.3};
  c.eps_scale = {1e-2, 1e-2, 1e-2, 1e-2, 1e-2};
  c.obs_weight = {1e3, 1e3, 1.0, 1.0, 1.0};
  c.eps_weight = {1e4, 1e4, 1e4, 1e4, 1e4};
  return c;
}

/// Everything that determines a run's numerical output. Output locations, worker
/// counts and similar plumbing live on the command line instead.
struct RunConfig {
  episode::EnvironmentConfig env;
  pcm::PcmConfig pcm = default_model();
  TrainingSection training;
  EvaluationSection evaluation;

  void validate() const;
};

/// Parses a JSON document over the defaults. Unknown keys and type mismatches throw ConfigError.
RunConfig from_json_text(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Complete effective configuration as canonical JSON (sorted keys, two-space indent).
std::string to_json_text(const RunConfig& cfg);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace sfc::config
