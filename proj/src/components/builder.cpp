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

#include "dpf/components/builder.hpp"

#include "dpf/error.hpp"

namespace dpf::components {
namespace {

void perturb_flows(ad::ParamStore& store, double scale, Rng& rng) {
  for (const auto& name : store.names()) {
    if (name.find(".flow.") == std::string::npos) continue;
    Tensor p = store.get(name);
    p.mutable_value() = scale * rng.normal_matrix(p.rows(), p.cols());
  }
}

}  // namespace

FilterComponents build_components(const ComponentSpec& spec) {
  const bool planar = spec.model == "planar";
  if (!planar && spec.model != "lgssm") throw ConfigError("unknown model \"" + spec.model + "\"; valid: lgssm, planar");
  if (planar && !spec.world) throw ConfigError("the planar model needs a world map");

  FilterComponents out;
  Rng rng(spec.seed);
  const Index dx = planar ? 3 : spec.state_dim;
  const Index dy = planar ? spec.world->patch_size() : spec.obs_dim;

  out.initial.mean = Eigen::VectorXd::Zero(dx);
  out.initial.std = Eigen::VectorXd::Ones(dx);

  GaussianDynamicSpec gs;
  gs.dim = dx;
  gs.mean = planar ? MeanKind::Residual : MeanKind::Linear;
  gs.init_coefficient = spec.init_theta1;
  gs.init_std = spec.trans_std;
  gs.learn_std = spec.learn_trans_std;
  gs.hidden = spec.hidden_width;
  if (spec.dynamic == "gaussian_const" || spec.dynamic == "gaussian_hetero") {
    gs.heteroscedastic = spec.dynamic == "gaussian_hetero";
    out.dynamic = std::make_unique<GaussianDynamic>(out.params, "dynamic", gs, rng);
  } else if (spec.dynamic == "flow_dynamic") {
    auto base = std::make_unique<GaussianDynamic>(out.params, "dynamic", gs, rng);
    auto flow = ad::CouplingFlow::create(out.params, "dynamic.flow", {dx, 0, spec.flow_depth, spec.flow_width}, rng);
    out.dynamic = std::make_unique<FlowDynamic>(std::move(base), std::move(flow));
  } else if (spec.dynamic == "robot_motion") {
    if (!planar) throw ConfigError("robot_motion dynamics need the planar model");
    out.dynamic = std::make_unique<RobotMotion>(spec.world->sigma_s1, spec.world->sigma_s2, spec.world->sigma_heading);
  } else {
    throw ConfigError("unknown dynamic \"" + spec.dynamic + "\"; valid: " + kDynamicNames);
  }

  if (spec.proposal == "bootstrap") {
    out.proposal = std::make_unique<BootstrapProposal>();
  } else if (spec.proposal == "cnf_proposal") {
    if (!out.dynamic->has_density()) throw ConfigError("cnf_proposal cannot be combined with " + spec.dynamic);
    auto flow =
        ad::CouplingFlow::create(out.params, "proposal.flow", {dx, dy, spec.flow_depth, spec.flow_width}, rng);
    out.proposal = std::make_unique<FlowProposal>(std::move(flow));
  } else {
    throw ConfigError("unknown proposal \"" + spec.proposal + "\"; valid: " + kProposalNames);
  }

  MeasurementSpec ms;
  ms.variant = spec.measurement;
  ms.obs_dim = dy;
  ms.state_dim = dx;
  ms.feature_width = spec.feature_width;
  ms.hidden = spec.hidden_width;
  ms.identity_encoders = spec.identity_encoders;
  ms.init_h = spec.init_theta2;
  ms.obs_var = spec.obs_var;
  ms.sigma_obs = spec.sigma_obs;
  ms.flow_depth = spec.flow_depth;
  ms.flow_width = spec.flow_width;
  ms.decoder = spec.decoder;
  if (planar) {
    const ssm::PlanarWorld world = *spec.world;
    ms.state_features = [world](const Tensor& x) { return ssm::observe_patches(world, x); };
    ms.state_feature_dim = world.patch_size();
  }
  out.measurement = make_measurement(out.params, "measurement", ms, rng);

  if (spec.flow_init_scale > 0.0) perturb_flows(out.params, spec.flow_init_scale, rng);
  return out;
}

}  // namespace dpf::components
