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

#ifndef PIRHC_SCENARIO_HPP
#define PIRHC_SCENARIO_HPP

#include <pirhc/stability.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pirhc {

/// Malformed or inconsistent scenario file (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ModelSection {
  /// lq_scalar | lq_2d | cubic_drift_1d
  std::string builtin = "lq_scalar";
  /// lq_scalar: a, b, sigma. lq_2d: sigma. cubic_drift_1d: sigma.
  std::map<std::string, double> params;

  friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

struct CostSection {
  double state_weight = 1.0;
  double terminal_weight = 0.5;
  double control_weight = 1.0;
  double horizon_seconds = 1.0;
  double assumption4_tolerance = 1e-9;

  friend bool operator==(const CostSection&, const CostSection&) = default;
};

struct PiSection {
  std::size_t rollouts = 1000;
  double dt2_seconds = 0.01;
  std::optional<double> r_seconds;
  double weight_floor = 0.0;

  friend bool operator==(const PiSection&, const PiSection&) = default;
};

struct RhcSection {
  /// path_integral | oracle
  std::string controller = "path_integral";
  double dt1_seconds = 0.05;
  double dt_sim_seconds = 0.01;
  double t_end_seconds = 10.0;
  std::vector<double> x0{3.0};

  friend bool operator==(const RhcSection&, const RhcSection&) = default;
};

struct InjectorSection {
  std::string kind = "none";
  double epsilon = 0.0;
  double sigma_scale = 0.0;
  /// against_nominal | fixed | random_per_call
  std::string direction = "against_nominal";
  std::vector<double> fixed_direction;

  friend bool operator==(const InjectorSection&, const InjectorSection&) = default;
};

struct StabilitySection {
  double p = 2.0;
  double delta = 0.5;
  std::size_t n_sphere = 8;
  std::size_t sphere_rollouts = 10000;
  double sphere_dt2_seconds = 0.005;
  double level_slack = 1.25;
  /// Hitting is counted up to hit_time_factor / fitted rate (capped at t_end).
  double hit_time_factor = 20.0;

  friend bool operator==(const StabilitySection&, const StabilitySection&) = default;
};

struct ExperimentSection {
  /// oracle_check | clt_sweep | bias_sweep | closed_loop | epsilon_sweep |
  /// gaussian_sweep | hold_sweep | sandwich
  std::string kind = "closed_loop";
  /// Sweep grid: rollout counts, dt2 values, epsilons, sigma scales, dt1
  /// values, or sandwich radii depending on kind.
  std::vector<double> values;
  std::size_t repeats = 10;
  /// Bias sweep only: r = window_steps * dt2 on every row.
  std::optional<std::size_t> window_steps;
  /// Oracle check: relative error bound and required passing fraction.
  double tolerance = 0.05;
  double pass_fraction = 0.9;

  friend bool operator==(const ExperimentSection&, const ExperimentSection&) = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string description;
  ModelSection model;
  CostSection cost;
  PiSection pi;
  RhcSection rhc;
  InjectorSection injector;
  StabilitySection stability;
  ExperimentSection experiment;
  std::uint64_t seed = 0;
  std::size_t realizations = 100;
  std::string output_dir = "out";
  bool plots = true;
  /// Verdicts that gate the exit code; empty means every verdict of the kind.
  std::vector<std::string> verdicts;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses and validates. Throws ConfigError on unknown keys, wrong types or
/// inconsistent values.
ScenarioConfig parse_config(const nlohmann::ordered_json& doc);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json emit_config(const ScenarioConfig& cfg);

/// Fills defaults that depend on other fields (r, verdict list, parameters).
ScenarioConfig resolve(ScenarioConfig cfg);

/// Verdict names the experiment kind can produce for this model.
std::vector<std::string> available_verdicts(const ScenarioConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  ScenarioConfig config;
};

/// Builtin presets, stable order, unique names.
const std::vector<Preset>& builtin_presets();
/// Builtins followed by every *.json file in `dir` (sorted by file name).
std::vector<Preset> list_presets(const std::optional<std::filesystem::path>& dir);
std::optional<Preset> find_preset(const std::string& name, const std::optional<std::filesystem::path>& dir);

/// A CSV table held in memory; cells are preformatted strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);
std::string to_csv(const Table& table);

struct ScenarioResult {
  nlohmann::ordered_json report;
  /// Keyed by file name, e.g. moments.csv.
  std::map<std::string, Table> tables;
  std::map<std::string, bool> verdicts;
  bool all_passed = true;
};

/// Runs the experiment in memory. Throws library errors on runtime failure.
ScenarioResult run_experiment(const ScenarioConfig& resolved);

/// Writes tables, report.json and (if enabled) plots into the output
/// directory. Returns the exit code: 0 all verdicts pass, 3 some verdict
/// failed, 1 runtime failure.
int run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& output_dir);

/// SVG line plots rebuilt from the CSV files in `dir`. Never throws.
std::vector<std::string> write_plots(const std::filesystem::path& dir);

}  // namespace pirhc

#endif  // PIRHC_SCENARIO_HPP
