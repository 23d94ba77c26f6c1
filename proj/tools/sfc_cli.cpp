#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sfc/checks.hpp"
#include "sfc/commands.hpp"
#include "sfc/config.hpp"
#include "sfc/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string config;
  std::vector<int> cases;
  std::optional<long long> episodes;
  std::optional<unsigned long long> seed;
  unsigned workers = 0;
  std::string out = "out";
  std::string checkpoint;
  std::size_t dump_trajectories = 0;
  bool resume = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file (defaults apply to missing keys)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers, "parallel episodes, 0 = one per hardware thread");
  cmd->add_option("--out", f.out, "output directory");
}

sfc::commands::Invocation resolve(const std::string& name, const Flags& f) {
  using sfc::config::ConfigError;
  sfc::commands::Invocation inv;
  if (!f.config.empty()) inv.cfg = sfc::config::load(f.config);
  auto& cfg = inv.cfg;
  if (f.episodes && *f.episodes <= 0) throw ConfigError("--episodes must be positive");
  for (int c : f.cases)
    if (c < 0 || c > 6) throw ConfigError("--case must be between 0 and 6");

  if (name == "train") {
    if (f.cases.size() > 1) throw ConfigError("train takes a single --case");
    if (!f.cases.empty()) cfg.training.case_id = f.cases.front();
    if (f.episodes) cfg.training.schedule.total_episodes = static_cast<std::size_t>(*f.episodes);
    if (f.seed) cfg.training.seed = *f.seed;
  } else {
    inv.cases = f.cases;
    if (inv.cases.empty()) {
      if (name == "baseline") inv.cases = {0, 1, 2, 3, 4, 5, 6};
      if (name == "eval") inv.cases = {1, 2, 3, 4, 5, 6};
    }
    if (f.episodes) cfg.evaluation.episodes = static_cast<std::size_t>(*f.episodes);
    if (f.seed) cfg.evaluation.seed = *f.seed;
  }
  cfg.validate();
  if (f.dump_trajectories > cfg.evaluation.episodes * inv.cases.size())
    throw ConfigError("--dump-trajectories exceeds the number of evaluated episodes");
  inv.workers = sfc::resolve_workers(f.workers);
  inv.out = f.out;
  inv.checkpoint = f.checkpoint;
  inv.resume = f.resume;
  inv.dump_trajectories = f.dump_trajectories;
  inv.log = &std::cout;
  return inv;
}

int selftest(const Flags& f) {
  sfc::config::RunConfig cfg;
  if (!f.config.empty()) cfg = sfc::config::load(f.config);
  const unsigned workers = sfc::resolve_workers(f.workers);
  std::vector<sfc::checks::CheckResult> results;
  results.push_back(sfc::checks::numerics());
  results.push_back(sfc::checks::gradient());
  results.push_back(sfc::checks::stabilization());
  results.push_back(sfc::checks::determinism(cfg, std::filesystem::path(f.out) / "selftest", workers));
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.pass;
  }
  return all ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-factor compensation intercept simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* baseline = app.add_subcommand("baseline", "uncompensated Monte Carlo (cases default to 0-6)");
  auto* train = app.add_subcommand("train", "online estimator training (case defaults to 3)");
  auto* eval = app.add_subcommand("eval", "paired baseline/compensated Monte Carlo (cases default to 1-6)");
  auto* selftest_cmd = app.add_subcommand("selftest", "numerics, gradient, stabilization and determinism checks");
  for (auto* cmd : {baseline, train, eval, selftest_cmd}) add_common(cmd, f);
  for (auto* cmd : {baseline, train, eval}) {
    cmd->add_option("--case", f.cases, "scale-factor case id(s), 0-6");
    cmd->add_option("--episodes", f.episodes, "episode count");
  }
  for (auto* cmd : {train, eval})
    cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint (default <out>/pcm_checkpoint.txt)");
  train->add_flag("--resume", f.resume, "continue training from the checkpoint");
  eval->add_option("--dump-trajectories", f.dump_trajectories, "write this many trajectory CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (selftest_cmd->parsed()) return selftest(f);
    const std::string name = app.get_subcommands().front()->get_name();
    const auto inv = resolve(name, f);
    std::cout << "config_hash " << sfc::config::config_hash(inv.cfg) << ", workers " << inv.workers << '\n';
    if (name == "baseline") sfc::commands::baseline(inv);
    if (name == "train") sfc::commands::train(inv);
    if (name == "eval") sfc::commands::eval(inv);
    std::cout << "wrote " << inv.out.string() << '\n';
    return kExitOk;
  } catch (const sfc::config::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << '\n';
    return kExitRuntime;
  }
}
