// Copyright 2026 The dpf Authors
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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "dpf/cli/config.hpp"
#include "dpf/cli/experiment.hpp"
#include "dpf/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Differentiable particle filter experiments"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  const std::pair<const char*, const char*> commands[] = {
      {"generate", "simulate a dataset from the configured model"},
      {"train", "fit the filter components to a dataset"},
      {"filter", "run the filter on every trajectory and write per-step metrics"},
      {"evaluate", "compare filter estimates with the Kalman filter (lgssm only)"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment configuration")->required();
    sub->add_option("--seed", seed, "override the configured master seed");
    sub->add_option("--out", out, "override the configured output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    dpf::cli::ExperimentConfig config = dpf::cli::parse_config_file(config_path);
    if (seed) config.seed = *seed;
    if (out) config.out_dir = *out;
    dpf::cli::run_experiment(config, command);
  } catch (const dpf::ConfigError& e) {
    std::cerr << "dpf: configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dpf: " << command << " failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
