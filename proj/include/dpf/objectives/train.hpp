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

#ifndef DPF_OBJECTIVES_TRAIN_HPP_
#define DPF_OBJECTIVES_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpf/ad/param_store.hpp"
#include "dpf/filter/pfnet.hpp"
#include "dpf/objectives/losses.hpp"

namespace dpf::objectives {

struct LossSettings {
  std::string kind = "elbo";   // rmse | gmm_ll | elbo | pseudo_lik | combined | pose
  Eigen::VectorXd gmm_sigma;   // diagonal of Sigma; ones when empty
  BlockSpec blocks;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double heading_weight = 1.0;
  double ae_weight = 0.0;      // weight of the auto-encoder term, added to any loss
  bool supervised = true;      // combined: include the supervised term
};

/// True for losses built from the filter's evidence estimate.
bool is_likelihood_loss(const std::string& kind);

/// Rejects loss/component pairings that are not meaningful.
void validate_loss(const LossSettings& loss, const filter::FilterComponents& comps);

struct TrainSettings {
  LossSettings loss;
  filter::FilterConfig filter;
  std::optional<filter::PfnetSettings> pfnet;  // planar trajectories: filter via pfnet_config
  ad::OptimizerSettings optimizer;
  double lr_decay = 1.0;       // learning rate multiplier applied after every epoch
  int epochs = 10;
  Index minibatch = 8;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no files written
  nlohmann::json metadata = nlohmann::json::object();
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;       // mean minibatch loss over the epoch (NaN for epoch 0)
  double validation_loss = 0.0;  // mean held-out loss after the epoch
};

struct TrainState {
  int epoch = 0;
  double running_loss = 0.0;
  double best_validation = 0.0;
  int best_epoch = 0;
  std::vector<Matrix> best_values;  // parameter values at best_epoch, store order
  std::vector<EpochRecord> curve;   // epoch 0 is the untrained evaluation
  std::uint64_t seed = 0;
};

/// Filter configuration used for one trajectory.
filter::FilterConfig filter_config_for(const TrainSettings& settings, const ssm::Trajectory& traj);

/// Loss of one trajectory (full sequence; pseudo_lik sums all blocks).
Tensor trajectory_loss(const filter::FilterComponents& comps, const ssm::Trajectory& traj,
                       const TrainSettings& settings, Rng& rng);

/// Mean loss over trajectories without recording a tape; trajectory i uses derive_seed(seed, i).
double evaluate_loss(const filter::FilterComponents& comps, std::span<const ssm::Trajectory> trajs,
                     const TrainSettings& settings, std::uint64_t seed);

/// Minibatch gradient descent on the components' parameters. Writes best/final
/// checkpoints and training_curve.csv under out_dir when set. A non-finite loss
/// aborts with NumericError; the best checkpoint written so far stays on disk.
TrainState train(filter::FilterComponents& comps, std::span<const ssm::Trajectory> train_set,
                 std::span<const ssm::Trajectory> validation_set, const TrainSettings& settings);

}  // namespace dpf::objectives

#endif  // DPF_OBJECTIVES_TRAIN_HPP_
