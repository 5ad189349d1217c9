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

// pirhc: run, list and validate receding-horizon path-integral experiments.

#include <pirhc/scenario.hpp>

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 1;

// A config path, or the name of a preset when no such file exists.
pirhc::ScenarioConfig load(const std::string& target, const std::optional<std::filesystem::path>& preset_dir) {
  if (std::filesystem::exists(target)) return pirhc::load_config(target);
  if (auto preset = pirhc::find_preset(target, preset_dir)) return preset->config;
  throw pirhc::ConfigError("no config file or preset named '" + target + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receding-horizon path-integral control experiments"};
  app.require_subcommand(1);

  std::string target;
  int workers = 0;
  std::string output_dir;
  std::string preset_dir;

  auto* run = app.add_subcommand("run", "run a scenario config (or a preset by name)");
  run->add_option("config", target, "config path or preset name")->required();
  run->add_option("--workers", workers, "OpenMP threads (default: hardware parallelism)")->check(CLI::PositiveNumber);
  run->add_option("--output-dir", output_dir, "overrides output_dir and PIRHC_OUTPUT_DIR");
  run->add_option("--preset-dir", preset_dir, "extra directory of *.json presets");

  auto* list = app.add_subcommand("list", "list builtin presets");
  list->add_option("preset_dir", preset_dir, "extra directory of *.json presets");

  auto* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", target, "config path or preset name")->required();
  validate->add_option("--preset-dir", preset_dir, "extra directory of *.json presets");

  auto* show = app.add_subcommand("show", "print the resolved config of a preset or file");
  show->add_option("config", target, "config path or preset name")->required();
  show->add_option("--preset-dir", preset_dir, "extra directory of *.json presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::optional<std::filesystem::path> extra;
  if (!preset_dir.empty()) extra = preset_dir;

  try {
    if (list->parsed()) {
      for (const auto& p : pirhc::list_presets(extra)) std::cout << p.name << "  " << p.description << "\n";
      return 0;
    }
    if (validate->parsed()) {
      const auto cfg = pirhc::resolve(load(target, extra));
      std::cout << "ok: " << cfg.name << " (" << cfg.experiment.kind << ")\n";
      return 0;
    }
    if (show->parsed()) {
      std::cout << pirhc::emit_config(pirhc::resolve(load(target, extra))).dump(2) << "\n";
      return 0;
    }
    pirhc::ScenarioConfig cfg = load(target, extra);
    if (const char* env = std::getenv("PIRHC_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    cfg = pirhc::resolve(cfg);
    if (workers > 0) omp_set_num_threads(workers);
    const int code = pirhc::run_scenario(cfg, cfg.output_dir);
    std::cout << cfg.name << ": " << (code == 0 ? "all verdicts pass" : code == 1 ? "runtime failure" : "verdict failed")
              << " (" << cfg.output_dir << "/report.json)\n";
    return code;
  } catch (const pirhc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
