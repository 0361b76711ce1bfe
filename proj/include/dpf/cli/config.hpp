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

#ifndef DPF_CLI_CONFIG_HPP_
#define DPF_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace dpf::cli {

/// Flat experiment description. Every key has a default except `model`.
struct ExperimentConfig {
  std::string model;  // lgssm | planar
  std::string dynamic;
  std::string proposal = "bootstrap";
  std::string measurement;
  std::int64_t num_particles = 100;
  std::int64_t steps = 50;
  std::int64_t num_trajectories = 10;
  std::int64_t validation_trajectories = -1;  // -1: a tenth of the data, at least one when possible
  std::string resampler;
  double soft_lambda = 0.5;
  double ot_epsilon = 0.1;
  std::int64_t ot_max_iter = 500;
  double ot_tol = 1e-8;
  double ess_min_frac = 0.5;
  std::string tbptt = "none";  // none | every_step
  std::string loss = "elbo";
  std::vector<double> gmm_sigma = {1.0};
  std::int64_t block_len = 0;  // 0: steps / block_count
  std::int64_t block_count = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double heading_weight = 1.0;
  double ae_weight = 0.0;
  std::string optimizer = "adam";
  double lr = 1e-2;
  double lr_decay = 1.0;
  std::int64_t epochs = 10;
  std::int64_t minibatch = 8;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string dataset;     // dataset directory; <out_dir>/dataset when empty
  std::string checkpoint;  // checkpoint stem to load before filter/evaluate/train
  std::int64_t flow_depth = 4;
  std::int64_t flow_width = 32;
  std::int64_t hidden_width = 32;
  std::int64_t feature_width = 16;
  bool identity_encoders = false;  // encoders pass inputs through; feature width = observation width
  double sigma_obs = 0.5;
  double theta1 = 0.9;
  double theta2 = 1.0;
  double init_theta1 = 0.9;
  double init_theta2 = 1.0;
  std::int64_t world_size = 48;
  std::int64_t patch_size = 8;
  std::int64_t workers = 1;

  std::filesystem::path dataset_dir() const;
};

/// Strict parse: unknown keys, wrong types, unknown variant names and
/// out-of-range values are ConfigErrors naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Canonical form with every key present.
nlohmann::json to_json(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace dpf::cli

#endif  // DPF_CLI_CONFIG_HPP_
