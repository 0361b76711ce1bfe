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

#include "dpf/filter/pfnet.hpp"

#include "dpf/error.hpp"

namespace dpf::filter {
namespace {

class FlatMeasurement final : public components::MeasurementModel {
 public:
  std::string name() const override { return "flat"; }
  bool normalised() const override { return false; }
  Tensor log_likelihood(const Tensor&, const Tensor& x) const override { return Tensor::zeros(x.rows(), 1); }
};

}  // namespace

FilterConfig pfnet_config(const PfnetSettings& settings, const ssm::Trajectory& traj) {
  if (traj.states.cols() != 3 || traj.actions.rows() != traj.steps()) {
    throw ShapeError("pfnet_filter needs a planar trajectory with actions");
  }
  FilterConfig config;
  config.num_particles = settings.num_particles;
  config.resample.scheme = settings.scheme;
  config.resample.soft_lambda = settings.soft_lambda;
  config.resample.ess_min_frac = settings.ess_min_frac;
  config.tbptt = settings.tbptt;
  components::InitialDistribution init;
  init.mean = traj.states.row(0).transpose();
  init.std = settings.init_std;
  config.initial = init;
  return config;
}

FilterOutput pfnet_filter(const ssm::Trajectory& traj, const FilterComponents& comps, const PfnetSettings& settings,
                          Rng& rng) {
  if (comps.dynamic->name() != "robot_motion" || comps.proposal->name() != "bootstrap") {
    throw ConfigError("pfnet_filter needs robot_motion dynamics with a bootstrap proposal");
  }
  return run_filter(traj, comps, pfnet_config(settings, traj), rng);
}

FilterOutput dead_reckoning_filter(const ssm::Trajectory& traj, const ssm::PlanarWorld& world,
                                   const PfnetSettings& settings, Rng& rng) {
  FilterComponents comps;
  comps.dynamic = std::make_unique<components::RobotMotion>(world.sigma_s1, world.sigma_s2, world.sigma_heading);
  comps.proposal = std::make_unique<components::BootstrapProposal>();
  comps.measurement = std::make_unique<FlatMeasurement>();
  return run_filter(traj, comps, pfnet_config(settings, traj), rng);
}

}  // namespace dpf::filter
