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

#ifndef DPF_CLI_EXPERIMENT_HPP_
#define DPF_CLI_EXPERIMENT_HPP_

#include <memory>
#include <string>

#include <json.hpp>

#include "dpf/cli/config.hpp"
#include "dpf/components/builder.hpp"
#include "dpf/filter/pfnet.hpp"
#include "dpf/objectives/train.hpp"
#include "dpf/ssm/model.hpp"

namespace dpf::cli {

/// Seed streams derived from the master seed.
enum class Stream : std::uint64_t { Components = 1, Filter = 2, Training = 3, Map = 4 };
std::uint64_t stream_seed(const ExperimentConfig& config, Stream stream);

/// Data-generating model described by the config (true theta values for lgssm,
/// a seeded smooth map for planar).
std::unique_ptr<ssm::StateSpaceModel> make_model(const ExperimentConfig& config);

/// Planar world with the dataset's map and the config's patch size.
ssm::PlanarWorld world_from_dataset(const ExperimentConfig& config, const ssm::Dataset& ds);

components::ComponentSpec component_spec(const ExperimentConfig& config, const ssm::Dataset& ds);
filter::FilterConfig filter_config(const ExperimentConfig& config);
filter::PfnetSettings pfnet_settings(const ExperimentConfig& config);
objectives::TrainSettings train_settings(const ExperimentConfig& config);

/// Builds components for the dataset and loads config.checkpoint when set.
components::FilterComponents load_components(const ExperimentConfig& config, const ssm::Dataset& ds);

/// Filters one trajectory without recording gradients.
filter::FilterOutput filter_trajectory(const ExperimentConfig& config, const components::FilterComponents& comps,
                                       const ssm::Trajectory& traj, std::size_t index);

void run_generate(const ExperimentConfig& config);
nlohmann::json run_train(const ExperimentConfig& config);
nlohmann::json run_filter(const ExperimentConfig& config);
nlohmann::json run_evaluate(const ExperimentConfig& config);

/// Dispatches on generate | train | filter | evaluate. Errors propagate as exceptions.
void run_experiment(const ExperimentConfig& config, const std::string& command);

}  // namespace dpf::cli

#endif  // DPF_CLI_EXPERIMENT_HPP_
