#include "sfc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sfc::config {

using nlohmann::json;

namespace {

// Each section is described once by a field visitor; the same description drives
// both serialization and strict parsing.

struct Writer {
  json& out;
  template <class T>
  void operator()(const char* key, const T& value) {
    out[key] = value;
  }
};

struct Reader {
  const json& in;
  std::string path;
  std::set<std::string> seen;

  template <class T>
  void operator()(const char* key, T& value) {
    seen.insert(key);
    auto it = in.find(key);
    if (it == in.end()) return;
    try {
      value = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: wrong type for '" + path + key + "'");
    }
  }

  void finish() const {
    for (auto it = in.begin(); it != in.end(); ++it)
      if (!seen.count(it.key())) throw ConfigError("config: unknown key '" + path + it.key() + "'");
  }
};

template <class V>
void visit(V& v, scenario::ScenarioConfig& c) {
  v("range_min", c.range_min);
  v("range_max", c.range_max);
  v("missile_speed", c.missile_speed);
  v("target_speed", c.target_speed);
  v("polar_min", c.polar_min);
  v("polar_max", c.polar_max);
  v("azimuth_max", c.azimuth_max);
  v("target_heading_max", c.target_heading_max);
  v("heading_error_max", c.heading_error_max);
  v("attitude_error_max", c.attitude_error_max);
  v("target_accel_max", c.target_accel_max);
  v("maneuvers", c.maneuvers);
  v("bang_duration_min", c.bang_duration_min);
  v("bang_duration_max", c.bang_duration_max);
  v("bang_start_min", c.bang_start_min);
  v("bang_start_max", c.bang_start_max);
  v("weave_period_min", c.weave_period_min);
  v("weave_period_max", c.weave_period_max);
  v("weave_offset_min", c.weave_offset_min);
  v("weave_offset_max", c.weave_offset_max);
  v("com_shift_max", c.com_shift_max);
  v("shooting_iterations", c.shooting_iterations);
}

template <class V>
void visit(V& v, dynamics::MissileConfig& c) {
  v("height", c.height);
  v("radius", c.radius);
  v("wet_mass", c.wet_mass);
  v("dry_mass", c.dry_mass);
  v("isp", c.isp);
  v("thrust_tau", c.thrust_tau);
}

template <class V>
void visit(V& v, dynamics::GravityModel& c) {
  v("mode", c.mode);
  v("mu", c.mu);
  v("earth_radius", c.earth_radius);
  v("altitude", c.altitude);
  v("uniform_g", c.uniform_g);
}

template <class V>
void visit(V& v, seeker::SeekerConfig& c) {
  v("sigma_theta", c.sigma_theta);
  v("sigma_omega", c.sigma_omega);
  v("tau_theta", c.tau_theta);
  v("fov_half_angle", c.fov_half_angle);
}

template <class V>
void visit(V& v, guidance::GuidanceConfig& c) {
  v("closing_speed_source", c.closing_speed_source);
  v("thrust_tau", c.thrust_tau);
  v("los_noise", c.los_noise);
  v("jerk_noise", c.jerk_noise);
  v("initial_rate_sigma", c.initial_rate_sigma);
  v("initial_accel_sigma", c.initial_accel_sigma);
  v("min_time_to_go", c.min_time_to_go);
  v("divert_margin", c.divert_margin);
  v("margin_fade_end", c.margin_fade_end);
  v("margin_fade_length", c.margin_fade_length);
  v("isp", c.isp);
  v("pointing_deadband", c.pointing_deadband);
  v("pointing_lookahead", c.pointing_lookahead);
  v("pointing_rate_cap", c.pointing_rate_cap);
  v("roll_deadband", c.roll_deadband);
  v("roll_lookahead", c.roll_lookahead);
  v("roll_rate_cap", c.roll_rate_cap);
}

template <class V>
void visit_simulation(V& v, episode::EnvironmentConfig& c) {
  v("omega_max", c.omega_max);
  v("max_time", c.max_time);
  v("nav_dt", c.nav_dt);
  v("nav_ticks_per_step", c.nav_ticks_per_step);
  v("fine_substeps", c.fine_substeps);
  v("fine_range", c.fine_range);
  v("force_fine", c.force_fine);
  v("max_abs_eps", c.max_abs_eps);
}

template <class V>
void visit(V& v, pcm::PcmConfig& c) {
  v("hidden", c.hidden);
  v("obs_scale", c.obs_scale);
  v("error_scale", c.error_scale);
  v("eps_scale", c.eps_scale);
  v("obs_weight", c.obs_weight);
  v("eps_weight", c.eps_weight);
}

template <class V>
void visit(V& v, TrainingSection& c) {
  v("case", c.case_id);
  v("seed", c.seed);
  v("init_seed", c.init_seed);
  v("episodes", c.schedule.total_episodes);
  v("update_every", c.schedule.update_every);
  v("buffer_capacity", c.schedule.buffer_capacity);
  v("segment_length", c.schedule.segment_length);
  v("passes", c.schedule.passes);
  v("whole_buffer", c.schedule.whole_buffer);
  v("learning_rate", c.schedule.adam.lr);
  v("adam_beta1", c.schedule.adam.beta1);
  v("adam_beta2", c.schedule.adam.beta2);
  v("adam_eps", c.schedule.adam.eps);
  v("window_fraction", c.schedule.window_fraction);
}

template <class V>
void visit(V& v, EvaluationSection& c) {
  v("episodes", c.episodes);
  v("seed", c.seed);
}

// Applies `fn(visitor-callable)` to every section with its JSON name.
template <class Fn>
void for_sections(RunConfig& c, Fn&& fn) {
  fn("scenario", [&](auto& v) { visit(v, c.env.scenario); });
  fn("missile", [&](auto& v) { visit(v, c.env.missile); });
  fn("gravity", [&](auto& v) { visit(v, c.env.gravity); });
  fn("seeker", [&](auto& v) { visit(v, c.env.seeker); });
  fn("guidance", [&](auto& v) { visit(v, c.env.guidance); });
  fn("simulation", [&](auto& v) { visit_simulation(v, c.env); });
  fn("pcm", [&](auto& v) { visit(v, c.pcm); });
  fn("training", [&](auto& v) { visit(v, c.training); });
  fn("evaluation", [&](auto& v) { visit(v, c.evaluation); });
}

}  // namespace
}  // namespace sfc::config

namespace sfc::dynamics {
NLOHMANN_JSON_SERIALIZE_ENUM(GravityMode, {{GravityMode::Off, "off"},
                                           {GravityMode::Uniform, "uniform"},
                                           {GravityMode::PointMass, "point_mass"}})
}
namespace sfc::guidance {
NLOHMANN_JSON_SERIALIZE_ENUM(ClosingSpeedSource, {{ClosingSpeedSource::Nominal, "nominal"},
                                                  {ClosingSpeedSource::LaunchCue, "launch_cue"}})
}

namespace sfc::config {

namespace {

// NLOHMANN_JSON_SERIALIZE_ENUM maps unknown strings to the first entry; reject them instead.
void check_enum(const json& doc, const char* section, const char* key, std::initializer_list<const char*> names) {
  auto s = doc.find(section);
  if (s == doc.end() || !s->is_object()) return;
  auto k = s->find(key);
  if (k == s->end()) return;
  if (k->is_string())
    for (const char* n : names)
      if (k->get<std::string>() == n) return;
  throw ConfigError(std::string("config: invalid value for '") + section + "." + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  const auto& s = env.scenario;
  require(s.range_min > 0.0 && s.range_min <= s.range_max, "scenario range bounds");
  require(s.missile_speed > 0.0 && s.target_speed >= 0.0, "scenario speeds");
  require(s.bang_duration_min > 0.0 && s.bang_duration_min <= s.bang_duration_max, "bang-bang duration bounds");
  require(s.weave_period_min > 0.0 && s.weave_period_min <= s.weave_period_max, "weave period bounds");
  require(env.missile.dry_mass > 0.0 && env.missile.dry_mass < env.missile.wet_mass, "missile masses");
  require(env.missile.isp > 0.0 && env.missile.thrust_tau >= 0.0, "missile propulsion");
  require(env.seeker.sigma_theta >= 0.0 && env.seeker.sigma_omega >= 0.0, "seeker noise");
  require(env.nav_dt > 0.0 && env.nav_ticks_per_step > 0 && env.fine_substeps > 0, "simulation steps");
  require(env.omega_max > 0.0 && env.max_time > 0.0 && env.max_abs_eps > 0.0, "simulation limits");
  const auto& g = env.guidance;
  require(g.los_noise > 0.0 && g.jerk_noise >= 0.0 && g.min_time_to_go > 0.0, "guidance filter");
  require(g.pointing_deadband >= 0.0 && g.roll_deadband >= 0.0, "guidance deadbands");
  require(g.pointing_rate_cap > 0.0 && g.roll_rate_cap > 0.0, "guidance rate caps");
  require(pcm.hidden > 0, "pcm hidden size");
  for (const auto* v : {&pcm.obs_scale, &pcm.error_scale, &pcm.eps_scale})
    for (double d : *v) require(d > 0.0, "pcm scales must be positive");
  for (const auto* v : {&pcm.obs_weight, &pcm.eps_weight})
    for (double d : *v) require(d >= 0.0, "pcm loss weights must be non-negative");
  require(training.case_id >= 0 && training.case_id <= 6, "training case must be 0..6");
  require(training.schedule.valid(), "training schedule");
  require(evaluation.episodes > 0, "evaluation episodes must be positive");
}

RunConfig from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_enum(doc, "gravity", "mode", {"off", "uniform", "point_mass"});
  check_enum(doc, "guidance", "closing_speed_source", {"nominal", "launch_cue"});

  RunConfig cfg;
  std::set<std::string> known;
  for_sections(cfg, [&](const char* name, auto&& apply) {
    known.insert(name);
    auto it = doc.find(name);
    if (it == doc.end()) return;
    if (!it->is_object()) throw ConfigError(std::string("config: section '") + name + "' must be an object");
    Reader r{*it, std::string(name) + ".", {}};
    apply(r);
    r.finish();
  });
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("config: unknown section '" + it.key() + "'");
  cfg.validate();
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string to_json_text(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json doc = json::object();
  for_sections(copy, [&](const char* name, auto&& apply) {
    json section = json::object();
    Writer w{section};
    apply(w);
    doc[name] = std::move(section);
  });
  return doc.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sfc::config
