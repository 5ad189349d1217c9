// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pirhc/scenario.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace pirhc {

using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kBuiltins = {"lq_scalar", "lq_2d", "cubic_drift_1d"};
const std::vector<std::string> kKinds = {"oracle_check", "clt_sweep",      "bias_sweep", "closed_loop",
                                         "epsilon_sweep", "gaussian_sweep", "hold_sweep", "sandwich"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::map<std::string, double> default_params(const std::string& builtin) {
  if (builtin == "lq_scalar") return {{"a", 0.0}, {"b", 1.0}, {"sigma", 1.0}};
  return {{"sigma", 1.0}};
}

int state_dim_of(const std::string& builtin) { return builtin == "lq_2d" ? 2 : 1; }
bool has_oracle(const std::string& builtin) { return builtin == "lq_scalar" || builtin == "lq_2d"; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at '" + path + "': " + what);
}

// Strict reader for one JSON object: every key must be consumed.
class Section {
 public:
  Section(const ordered_json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail(path_, "expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it != doc_.end()) convert(*it, out, path_ + "." + key);
  }

  const ordered_json* child(const char* key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.count(item.key())) fail(path_, "unknown key '" + item.key() + "'");
    }
  }

 private:
  static void convert(const ordered_json& j, double& out, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    out = j.get<double>();
  }
  template <class U>
    requires std::is_unsigned_v<U>
  static void convert(const ordered_json& j, U& out, const std::string& path) {
    if (j.is_number_unsigned()) {
      out = j.get<U>();
    } else if (j.is_number_integer()) {
      fail(path, "expected a non-negative integer");
    } else {
      fail(path, "expected an integer");
    }
  }
  static void convert(const ordered_json& j, bool& out, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    out = j.get<bool>();
  }
  static void convert(const ordered_json& j, std::string& out, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    out = j.get<std::string>();
  }
  template <class T>
  static void convert(const ordered_json& j, std::vector<T>& out, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      T v{};
      convert(j[i], v, path + "[" + std::to_string(i) + "]");
      out.push_back(std::move(v));
    }
  }
  template <class T>
  static void convert(const ordered_json& j, std::optional<T>& out, const std::string& path) {
    if (j.is_null()) {
      out.reset();
      return;
    }
    T v{};
    convert(j, v, path);
    out = v;
  }
  static void convert(const ordered_json& j, std::map<std::string, double>& out, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    out.clear();
    for (const auto& item : j.items()) convert(item.value(), out[item.key()], path + "." + item.key());
  }

  const ordered_json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

void validate(const ScenarioConfig& cfg) {
  require(contains(kBuiltins, cfg.model.builtin), "model.builtin",
          "unknown builtin '" + cfg.model.builtin + "' (lq_scalar, lq_2d, cubic_drift_1d)");
  const auto allowed = default_params(cfg.model.builtin);
  for (const auto& [key, value] : cfg.model.params) {
    require(allowed.count(key) > 0, "model.params." + key, "not a parameter of " + cfg.model.builtin);
    require(std::isfinite(value), "model.params." + key, "must be finite");
  }

  const CostSection& c = cfg.cost;
  require(c.state_weight >= 0.0 && c.terminal_weight >= 0.0, "cost", "weights must be non-negative");
  require(c.control_weight > 0.0, "cost.control_weight", "must be positive");
  require(c.horizon_seconds > 0.0, "cost.horizon_seconds", "must be positive");
  require(c.assumption4_tolerance > 0.0, "cost.assumption4_tolerance", "must be positive");

  const PiSection& pi = cfg.pi;
  require(pi.rollouts >= 1, "pi.rollouts", "must be at least 1");
  require(pi.dt2_seconds > 0.0, "pi.dt2_seconds", "must be positive");
  require(!pi.r_seconds || *pi.r_seconds > 0.0, "pi.r_seconds", "must be positive");
  require(pi.weight_floor >= 0.0, "pi.weight_floor", "must be non-negative");
  try {
    PiConfig pc{pi.rollouts, pi.dt2_seconds, pi.r_seconds, pi.weight_floor};
    pc.horizon_steps(c.horizon_seconds);
    pc.window_steps(c.horizon_seconds);
  } catch (const Error& e) {
    fail("pi", e.what());
  }

  const RhcSection& rhc = cfg.rhc;
  require(rhc.controller == "path_integral" || rhc.controller == "oracle", "rhc.controller",
          "expected path_integral or oracle");
  require(rhc.controller != "oracle" || has_oracle(cfg.model.builtin), "rhc.controller",
          "the oracle controller needs an LQ builtin");
  try {
    RhcConfig rc{rhc.dt1_seconds, rhc.dt_sim_seconds, rhc.t_end_seconds};
    rc.steps_per_window();
    rc.windows();
  } catch (const Error& e) {
    fail("rhc", e.what());
  }
  require(static_cast<int>(rhc.x0.size()) == state_dim_of(cfg.model.builtin), "rhc.x0",
          "length must equal the state dimension " + std::to_string(state_dim_of(cfg.model.builtin)));

  const InjectorSection& inj = cfg.injector;
  require(inj.direction == "against_nominal" || inj.direction == "fixed" || inj.direction == "random_per_call",
          "injector.direction", "expected against_nominal, fixed or random_per_call");
  try {
    ErrorInjector e;
    e.kind = injector_kind_from_string(inj.kind);
    e.epsilon = inj.epsilon;
    e.sigma_scale = inj.sigma_scale;
    e.direction_mode = inj.direction == "fixed"             ? DirectionMode::fixed
                       : inj.direction == "random_per_call" ? DirectionMode::random_per_call
                                                            : DirectionMode::against_nominal;
    e.fixed_direction = Eigen::Map<const Vector>(inj.fixed_direction.data(),
                                                 static_cast<Eigen::Index>(inj.fixed_direction.size()));
    e.validate(1);
  } catch (const Error& e) {
    fail("injector", e.what());
  }

  const StabilitySection& s = cfg.stability;
  require(s.p > 0.0, "stability.p", "must be positive");
  require(s.delta > 0.0, "stability.delta", "must be positive");
  require(s.n_sphere >= 1, "stability.n_sphere", "must be at least 1");
  require(s.sphere_rollouts >= 1, "stability.sphere_rollouts", "must be at least 1");
  require(s.sphere_dt2_seconds > 0.0, "stability.sphere_dt2_seconds", "must be positive");
  require(s.level_slack >= 1.0, "stability.level_slack", "must be at least 1");
  require(s.hit_time_factor > 0.0, "stability.hit_time_factor", "must be positive");

  const ExperimentSection& ex = cfg.experiment;
  require(contains(kKinds, ex.kind), "experiment.kind", "unknown experiment kind '" + ex.kind + "'");
  const bool sweep = ex.kind != "oracle_check" && ex.kind != "closed_loop";
  require(!sweep || !ex.values.empty(), "experiment.values", "a sweep needs at least one value");
  for (double v : ex.values) require(std::isfinite(v), "experiment.values", "values must be finite");
  if (ex.kind == "clt_sweep") {
    for (double v : ex.values) {
      require(v >= 1.0 && v == std::floor(v), "experiment.values", "rollout counts must be positive integers");
    }
  }
  if (ex.kind == "epsilon_sweep" || ex.kind == "gaussian_sweep") {
    require(ex.values.front() == 0.0, "experiment.values", "the grid must start at 0");
    for (double v : ex.values) require(v >= 0.0, "experiment.values", "values must be non-negative");
  } else {
    for (double v : ex.values) require(v > 0.0, "experiment.values", "values must be positive");
  }
  if (ex.kind == "bias_sweep") {
    for (double dt2 : ex.values) {
      try {
        PiConfig pc{pi.rollouts, dt2, std::nullopt, pi.weight_floor};
        if (ex.window_steps) pc.r = static_cast<double>(*ex.window_steps) * dt2;
        else pc.r = pi.r_seconds;
        pc.horizon_steps(c.horizon_seconds);
        pc.window_steps(c.horizon_seconds);
      } catch (const Error& e) {
        fail("experiment.values", e.what());
      }
    }
  }
  if (ex.kind == "hold_sweep") {
    for (double dt1 : ex.values) {
      try {
        RhcConfig rc{dt1, rhc.dt_sim_seconds, rhc.t_end_seconds};
        rc.steps_per_window();
        rc.windows();
      } catch (const Error& e) {
        fail("experiment.values", e.what());
      }
    }
  }
  require(ex.repeats >= 1, "experiment.repeats", "must be at least 1");
  require(ex.kind != "clt_sweep" || ex.repeats >= 2, "experiment.repeats", "a variance needs two repeats");
  require(!ex.window_steps || *ex.window_steps >= 1, "experiment.window_steps", "must be at least 1");
  require(ex.tolerance > 0.0, "experiment.tolerance", "must be positive");
  require(ex.pass_fraction > 0.0 && ex.pass_fraction <= 1.0, "experiment.pass_fraction", "must be in (0, 1]");
  const bool needs_oracle = ex.kind == "oracle_check" || ex.kind == "bias_sweep" || ex.kind == "sandwich";
  require(!needs_oracle || has_oracle(cfg.model.builtin), "experiment.kind", ex.kind + " needs an LQ builtin");

  require(cfg.realizations >= 1, "realizations", "must be at least 1");
  require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
  const auto known = available_verdicts(cfg);
  for (const auto& v : cfg.verdicts) {
    require(contains(known, v), "verdicts", "'" + v + "' is not produced by this experiment");
  }
}

}  // namespace

std::vector<std::string> available_verdicts(const ScenarioConfig& cfg) {
  const std::string& kind = cfg.experiment.kind;
  if (kind == "oracle_check") return {"control_agreement"};
  if (kind == "clt_sweep") return {"clt_slope"};
  if (kind == "bias_sweep") return {"bias_non_increasing", "bias_shrinks"};
  if (kind == "closed_loop") {
    if (has_oracle(cfg.model.builtin)) return {"rate_positive", "envelope", "hit", "residence"};
    return {"rate_positive"};
  }
  if (kind == "epsilon_sweep") return {"rates_non_increasing", "first_rate_is_max"};
  if (kind == "gaussian_sweep") return {"plateaus_non_decreasing"};
  if (kind == "hold_sweep") return {"rates_non_increasing", "hold_quarter_rate"};
  if (kind == "sandwich") return {"sandwich"};
  return {};
}

ScenarioConfig parse_config(const ordered_json& doc) {
  ScenarioConfig cfg;
  try {
    Section top(doc, "$");
    top.read("name", cfg.name);
    top.read("description", cfg.description);
    if (const auto* m = top.child("model")) {
      Section s(*m, "$.model");
      s.read("builtin", cfg.model.builtin);
      s.read("params", cfg.model.params);
      s.finish();
    }
    if (const auto* m = top.child("cost")) {
      Section s(*m, "$.cost");
      s.read("state_weight", cfg.cost.state_weight);
      s.read("terminal_weight", cfg.cost.terminal_weight);
      s.read("control_weight", cfg.cost.control_weight);
      s.read("horizon_seconds", cfg.cost.horizon_seconds);
      s.read("assumption4_tolerance", cfg.cost.assumption4_tolerance);
      s.finish();
    }
    if (const auto* m = top.child("pi")) {
      Section s(*m, "$.pi");
      s.read("rollouts", cfg.pi.rollouts);
      s.read("dt2_seconds", cfg.pi.dt2_seconds);
      s.read("r_seconds", cfg.pi.r_seconds);
      s.read("weight_floor", cfg.pi.weight_floor);
      s.finish();
    }
    if (const auto* m = top.child("rhc")) {
      Section s(*m, "$.rhc");
      s.read("controller", cfg.rhc.controller);
      s.read("dt1_seconds", cfg.rhc.dt1_seconds);
      s.read("dt_sim_seconds", cfg.rhc.dt_sim_seconds);
      s.read("t_end_seconds", cfg.rhc.t_end_seconds);
      s.read("x0", cfg.rhc.x0);
      s.finish();
    }
    if (const auto* m = top.child("injector")) {
      Section s(*m, "$.injector");
      s.read("kind", cfg.injector.kind);
      s.read("epsilon", cfg.injector.epsilon);
      s.read("sigma_scale", cfg.injector.sigma_scale);
      s.read("direction", cfg.injector.direction);
      s.read("fixed_direction", cfg.injector.fixed_direction);
      s.finish();
    }
    if (const auto* m = top.child("stability")) {
      Section s(*m, "$.stability");
      s.read("p", cfg.stability.p);
      s.read("delta", cfg.stability.delta);
      s.read("n_sphere", cfg.stability.n_sphere);
      s.read("sphere_rollouts", cfg.stability.sphere_rollouts);
      s.read("sphere_dt2_seconds", cfg.stability.sphere_dt2_seconds);
      s.read("level_slack", cfg.stability.level_slack);
      s.read("hit_time_factor", cfg.stability.hit_time_factor);
      s.finish();
    }
    if (const auto* m = top.child("experiment")) {
      Section s(*m, "$.experiment");
      s.read("kind", cfg.experiment.kind);
      s.read("values", cfg.experiment.values);
      s.read("repeats", cfg.experiment.repeats);
      s.read("window_steps", cfg.experiment.window_steps);
      s.read("tolerance", cfg.experiment.tolerance);
      s.read("pass_fraction", cfg.experiment.pass_fraction);
      s.finish();
    }
    top.read("seed", cfg.seed);
    top.read("realizations", cfg.realizations);
    top.read("output_dir", cfg.output_dir);
    top.read("plots", cfg.plots);
    top.read("verdicts", cfg.verdicts);
    top.finish();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

ordered_json emit_config(const ScenarioConfig& cfg) {
  ordered_json j;
  j["name"] = cfg.name;
  j["description"] = cfg.description;
  j["model"] = {{"builtin", cfg.model.builtin}, {"params", ordered_json::object()}};
  for (const auto& [k, v] : cfg.model.params) j["model"]["params"][k] = v;
  j["cost"] = {{"state_weight", cfg.cost.state_weight},
               {"terminal_weight", cfg.cost.terminal_weight},
               {"control_weight", cfg.cost.control_weight},
               {"horizon_seconds", cfg.cost.horizon_seconds},
               {"assumption4_tolerance", cfg.cost.assumption4_tolerance}};
  j["pi"] = {{"rollouts", cfg.pi.rollouts}, {"dt2_seconds", cfg.pi.dt2_seconds}};
  if (cfg.pi.r_seconds) j["pi"]["r_seconds"] = *cfg.pi.r_seconds;
  j["pi"]["weight_floor"] = cfg.pi.weight_floor;
  j["rhc"] = {{"controller", cfg.rhc.controller},
              {"dt1_seconds", cfg.rhc.dt1_seconds},
              {"dt_sim_seconds", cfg.rhc.dt_sim_seconds},
              {"t_end_seconds", cfg.rhc.t_end_seconds},
              {"x0", cfg.rhc.x0}};
  j["injector"] = {{"kind", cfg.injector.kind},
                   {"epsilon", cfg.injector.epsilon},
                   {"sigma_scale", cfg.injector.sigma_scale},
                   {"direction", cfg.injector.direction},
                   {"fixed_direction", cfg.injector.fixed_direction}};
  j["stability"] = {{"p", cfg.stability.p},
                    {"delta", cfg.stability.delta},
                    {"n_sphere", cfg.stability.n_sphere},
                    {"sphere_rollouts", cfg.stability.sphere_rollouts},
                    {"sphere_dt2_seconds", cfg.stability.sphere_dt2_seconds},
                    {"level_slack", cfg.stability.level_slack},
                    {"hit_time_factor", cfg.stability.hit_time_factor}};
  j["experiment"] = {{"kind", cfg.experiment.kind}, {"values", cfg.experiment.values},
                     {"repeats", cfg.experiment.repeats}};
  if (cfg.experiment.window_steps) j["experiment"]["window_steps"] = *cfg.experiment.window_steps;
  j["experiment"]["tolerance"] = cfg.experiment.tolerance;
  j["experiment"]["pass_fraction"] = cfg.experiment.pass_fraction;
  j["seed"] = cfg.seed;
  j["realizations"] = cfg.realizations;
  j["output_dir"] = cfg.output_dir;
  j["plots"] = cfg.plots;
  j["verdicts"] = cfg.verdicts;
  return j;
}

ScenarioConfig resolve(ScenarioConfig cfg) {
  validate(cfg);
  for (const auto& [k, v] : default_params(cfg.model.builtin)) cfg.model.params.try_emplace(k, v);
  if (!cfg.pi.r_seconds) cfg.pi.r_seconds = 10.0 * cfg.pi.dt2_seconds;
  if (cfg.verdicts.empty()) cfg.verdicts = available_verdicts(cfg);
  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------- presets

namespace {

ScenarioConfig lq_scalar_base(const std::string& name, const std::string& description) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.description = description;
  cfg.model.builtin = "lq_scalar";
  cfg.output_dir = "out/" + name;
  return cfg;
}

std::vector<Preset> make_presets() {
  std::vector<Preset> out;
  auto add = [&](ScenarioConfig cfg) { out.push_back(Preset{cfg.name, cfg.description, std::move(cfg)}); };

  {
    auto cfg = lq_scalar_base("lq_oracle_check", "path-integral u_hat(1) against the Riccati control on lq_scalar");
    cfg.pi = {100000, 0.005, 0.05, 0.0};
    cfg.rhc.x0 = {1.0};
    cfg.experiment.kind = "oracle_check";
    cfg.experiment.repeats = 10;
    cfg.seed = 1;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("clt_sweep", "variance of u_hat over 50 seeds against N, log-log slope");
    cfg.pi = {1000, 0.005, 0.05, 0.0};
    cfg.rhc.x0 = {1.0};
    cfg.experiment.kind = "clt_sweep";
    cfg.experiment.values = {1000, 10000, 100000};
    cfg.experiment.repeats = 50;
    cfg.seed = 2;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("bias_sweep", "bias of mean u_hat against dt2 at N = 1e6 with r = 4 dt2");
    cfg.pi = {1000000, 0.005, std::nullopt, 0.0};
    cfg.rhc.x0 = {1.0};
    cfg.experiment.kind = "bias_sweep";
    cfg.experiment.values = {0.04, 0.02, 0.01, 0.005};
    cfg.experiment.window_steps = 4;
    cfg.experiment.repeats = 10;
    cfg.seed = 3;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("closed_loop_pi",
                              "closed-loop moments under the path-integral controller: decay, envelope, level set");
    cfg.pi = {1000, 0.02, 0.04, 0.0};
    cfg.rhc = {"path_integral", 0.05, 0.01, 12.0, {3.0}};
    cfg.experiment.kind = "closed_loop";
    cfg.realizations = 500;
    cfg.seed = 4;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("robustness_eps_sweep", "deterministic controller-error sweep on the oracle closed loop");
    cfg.rhc = {"oracle", 0.05, 0.01, 8.0, {3.0}};
    cfg.injector.kind = "deterministic";
    cfg.experiment.kind = "epsilon_sweep";
    cfg.experiment.values = {0.0, 0.05, 0.2, 0.8};
    cfg.realizations = 500;
    cfg.seed = 5;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("gaussian_sweep", "Gaussian controller-error sweep on the oracle closed loop");
    cfg.rhc = {"oracle", 0.05, 0.01, 8.0, {3.0}};
    cfg.injector.kind = "gaussian";
    cfg.experiment.kind = "gaussian_sweep";
    cfg.experiment.values = {0.0, 0.01, 0.1};
    cfg.realizations = 500;
    cfg.seed = 6;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("sample_hold_sweep", "hold-length sweep on the oracle closed loop");
    cfg.rhc = {"oracle", 0.05, 0.01, 8.0, {3.0}};
    cfg.experiment.kind = "hold_sweep";
    cfg.experiment.values = {0.01, 0.05, 0.25};
    cfg.realizations = 500;
    cfg.seed = 7;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("value_sandwich", "value estimates against the quadratic sandwich bounds");
    cfg.pi = {100000, 0.005, std::nullopt, 0.0};
    cfg.experiment.kind = "sandwich";
    cfg.experiment.values = {0.25, 0.5, 1.0, 2.0, 4.0};
    cfg.seed = 8;
    add(cfg);
  }
  {
    auto cfg = lq_scalar_base("smoke", "tiny lq_scalar closed loop (N = 100, M = 10)");
    cfg.pi = {100, 0.02, 0.04, 0.0};
    cfg.rhc = {"path_integral", 0.05, 0.01, 2.0, {3.0}};
    cfg.stability.sphere_rollouts = 1000;
    cfg.stability.sphere_dt2_seconds = 0.02;
    cfg.experiment.kind = "closed_loop";
    cfg.realizations = 10;
    cfg.verdicts = {"rate_positive"};
    cfg.seed = 9;
    add(cfg);
  }
  {
    ScenarioConfig cfg;
    cfg.name = "double_integrator_oracle";
    cfg.description = "noisy double integrator under the Riccati oracle";
    cfg.model.builtin = "lq_2d";
    cfg.cost.terminal_weight = 1.0;
    cfg.rhc = {"oracle", 0.05, 0.01, 10.0, {3.0, 0.0}};
    cfg.experiment.kind = "closed_loop";
    cfg.realizations = 200;
    cfg.verdicts = {"rate_positive", "envelope", "hit"};
    cfg.output_dir = "out/double_integrator_oracle";
    cfg.seed = 10;
    add(cfg);
  }
  {
    ScenarioConfig cfg;
    cfg.name = "cubic_drift_pi";
    cfg.description = "cubic-drift system under the path-integral controller";
    cfg.model.builtin = "cubic_drift_1d";
    cfg.pi = {500, 0.02, 0.04, 0.0};
    cfg.rhc = {"path_integral", 0.05, 0.01, 6.0, {2.0}};
    cfg.experiment.kind = "closed_loop";
    cfg.realizations = 100;
    cfg.output_dir = "out/cubic_drift_pi";
    cfg.seed = 11;
    add(cfg);
  }
  return out;
}

}  // namespace

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = make_presets();
  return presets;
}

std::vector<Preset> list_presets(const std::optional<std::filesystem::path>& dir) {
  std::vector<Preset> out = builtin_presets();
  if (!dir) return out;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(*dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(*dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    ScenarioConfig cfg = load_config(file);
    const std::string name = file.stem().string();
    const bool clash =
        std::any_of(out.begin(), out.end(), [&](const Preset& p) { return p.name == name; });
    if (clash) throw ConfigError("preset '" + name + "' in " + dir->string() + " shadows an existing preset");
    out.push_back(Preset{name, cfg.description, std::move(cfg)});
  }
  return out;
}

std::optional<Preset> find_preset(const std::string& name, const std::optional<std::filesystem::path>& dir) {
  for (auto& p : list_presets(dir)) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

// -------------------------------------------------------------------- CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

}  // namespace pirhc
