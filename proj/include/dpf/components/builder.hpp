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

#ifndef DPF_COMPONENTS_BUILDER_HPP_
#define DPF_COMPONENTS_BUILDER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "dpf/components/measurement.hpp"
#include "dpf/components/proposal.hpp"

namespace dpf::components {

/// Everything needed to assemble the learnable parts of a filter by name.
struct ComponentSpec {
  std::string model = "lgssm";  // lgssm | planar
  std::string dynamic = "gaussian_const";
  std::string proposal = "bootstrap";
  std::string measurement = "analytic_gaussian";
  Index state_dim = 1;
  Index obs_dim = 1;
  double init_theta1 = 0.9;     // linear transition coefficient at initialisation
  double init_theta2 = 1.0;     // analytic emission coefficient at initialisation
  double trans_std = 1.0;
  bool learn_trans_std = false;
  double obs_var = 0.1;
  int flow_depth = 4;
  Index flow_width = 32;
  Index hidden_width = 32;
  Index feature_width = 16;
  double sigma_obs = 0.5;
  bool identity_encoders = false;
  bool decoder = false;
  /// When positive, every flow parameter is redrawn as N(0, scale^2) so flows
  /// start away from the identity. Used by gradient and density checks.
  double flow_init_scale = 0.0;
  std::optional<ssm::PlanarWorld> world;  // required for the planar model
  std::uint64_t seed = 0;                 // parameter initialisation stream
};

struct FilterComponents {
  ad::ParamStore params;
  InitialDistribution initial;
  std::unique_ptr<DynamicModel> dynamic;
  std::unique_ptr<ProposalModel> proposal;
  std::unique_ptr<MeasurementModel> measurement;
};

inline constexpr const char* kDynamicNames = "gaussian_const, gaussian_hetero, flow_dynamic, robot_motion";
inline constexpr const char* kProposalNames = "bootstrap, cnf_proposal";
inline constexpr const char* kMeasurementNames =
    "analytic_gaussian, nn_scalar, feature_cosine, feature_gaussian, cnf_measurement";

FilterComponents build_components(const ComponentSpec& spec);

}  // namespace dpf::components

#endif  // DPF_COMPONENTS_BUILDER_HPP_
