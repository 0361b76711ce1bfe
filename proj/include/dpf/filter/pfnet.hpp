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

#ifndef DPF_FILTER_PFNET_HPP_
#define DPF_FILTER_PFNET_HPP_

#include "dpf/filter/filter.hpp"

namespace dpf::filter {

/// Localisation filter on a planar world: action-driven robot motion as a
/// bootstrap proposal, a learned compatibility score between the observed
/// patch and the map patch at each particle, and soft resampling.
struct PfnetSettings {
  Index num_particles = 100;
  resampling::Scheme scheme = resampling::Scheme::Soft;
  double soft_lambda = 0.5;
  double ess_min_frac = 0.5;
  Eigen::Vector3d init_std{1.0, 1.0, 0.1};  // spread of pi(x_0) around the true first pose
  bool tbptt = false;
};

FilterConfig pfnet_config(const PfnetSettings& settings, const ssm::Trajectory& traj);

/// Runs the filter on one planar trajectory; comps must use robot_motion and bootstrap.
FilterOutput pfnet_filter(const ssm::Trajectory& traj, const FilterComponents& comps, const PfnetSettings& settings,
                          Rng& rng);

/// Same motion model and initial spread with every measurement ignored (uniform
/// weights), i.e. a bootstrap filter whose weights never move.
FilterOutput dead_reckoning_filter(const ssm::Trajectory& traj, const ssm::PlanarWorld& world,
                                   const PfnetSettings& settings, Rng& rng);

}  // namespace dpf::filter

#endif  // DPF_FILTER_PFNET_HPP_
