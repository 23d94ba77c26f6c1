#pragma once

// Property suites shared by `sfc selftest` and the acceptance binary.

#include <cstdint>
#include <filesystem>
#include <string>

#include "sfc/commands.hpp"

namespace sfc::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Quaternion norm drift, torque-free angular momentum, RK4 attitude against the
/// closed form, and the thruster torque table against hand-computed values.
CheckResult numerics();

/// Analytic against central-difference gradients on seeded segments.
CheckResult gradient(std::uint64_t seed = 5, std::size_t samples = 100);

/// Stabilization identity after 10 s of rotation, and the rate scale-factor effect
/// on a scripted roll profile with and without exact compensation.
CheckResult stabilization();

/// Estimator quality on held-out episodes: share of episodes below half the
/// zero-predictor loss and median final-second rate-error per component.
CheckResult estimator_learning(const commands::EstimatorSummary& s);

/// Compensated against uncompensated on paired episodes for two cases (3 and 4).
CheckResult compensation_benefit(const commands::PairedRow& case3, const commands::PairedRow& case4);

/// Baseline hit rates non-increasing over cases 0, 3, 4, and smaller compensated
/// degradation from case 3 to case 4 than uncompensated.
CheckResult trend(const montecarlo::StatsRow& base0, const commands::PairedRow& case3,
                  const commands::PairedRow& case4);

/// Runs small baseline, train and eval commands twice (different worker counts)
/// under `dir` and compares every output file byte for byte.
CheckResult determinism(const config::RunConfig& cfg, const std::filesystem::path& dir, unsigned workers);

}  // namespace sfc::checks
