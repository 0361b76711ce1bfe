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

#ifndef DPF_SSM_MODEL_HPP_
#define DPF_SSM_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpf/ad/tensor.hpp"
#include "dpf/random.hpp"

namespace dpf::ssm {

using ad::Index;
using ad::Matrix;
using Eigen::VectorXd;

/// Ancestral sample of a state-space model: states x_0..x_T (rows), observations
/// y_1..y_T (row t-1 holds y_t), and actions a_1..a_T for action-driven models.
struct Trajectory {
  Matrix states;
  Matrix observations;
  Matrix actions;
  std::uint64_t seed = 0;

  Index steps() const { return observations.rows(); }
};

/// Generative model p(x_0) p(x_t | x_{t-1}, a_t) p(y_t | x_t).
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string id() const = 0;
  virtual Index state_dim() const = 0;
  virtual Index obs_dim() const = 0;
  virtual Index action_dim() const { return 0; }

  virtual VectorXd sample_initial(Rng& rng) const = 0;
  virtual VectorXd sample_action(Index /*t*/, const VectorXd& /*state*/, Rng& /*rng*/) const { return {}; }
  virtual VectorXd sample_transition(const VectorXd& state, const VectorXd& action, Rng& rng) const = 0;
  virtual VectorXd sample_observation(const VectorXd& state, Rng& rng) const = 0;
};

/// A set of trajectories with the metadata needed to reload and filter them.
struct Dataset {
  std::string model_id;
  Index state_dim = 0;
  Index obs_dim = 0;
  Index action_dim = 0;
  Index steps = 0;
  std::uint64_t seed = 0;
  std::vector<Trajectory> trajectories;
  std::optional<Matrix> map;  // occupancy grid for planar-world datasets
};

}  // namespace dpf::ssm

#endif  // DPF_SSM_MODEL_HPP_
