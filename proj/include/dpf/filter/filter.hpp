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

#ifndef DPF_FILTER_FILTER_HPP_
#define DPF_FILTER_FILTER_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "dpf/components/builder.hpp"
#include "dpf/resampling/resampling.hpp"
#include "dpf/ssm/model.hpp"

namespace dpf::filter {

using ad::Index;
using ad::Matrix;
using ad::Tensor;
using components::FilterComponents;

struct ParticleEnsemble {
  Tensor particles;          // N x d_X
  Tensor log_weights;        // N x 1, unnormalised log w
  Tensor log_norm_weights;   // N x 1, log W
  std::vector<Index> ancestors;
  bool resampled = false;  // whether the step producing this ensemble resampled
  Index t = 0;
  double ess = 0.0;

  Index size() const { return particles.rows(); }
  Eigen::VectorXd weights() const;
};

struct FilterConfig {
  Index num_particles = 100;
  resampling::ResamplePolicy resample;
  bool tbptt = false;              // cut gradients at the entry of every step
  bool retain_ensembles = false;
  std::optional<components::InitialDistribution> initial;  // overrides the components' pi(x_0)
};

struct StepResult {
  ParticleEnsemble ensemble;
  Tensor increment;  // l_t, 1 x 1
};

struct FilterOutput {
  std::vector<Tensor> means;        // x_bar_t for t = 0..T, each 1 x d_X
  std::vector<double> ess;          // t = 0..T
  std::vector<Tensor> increments;   // l_t for t = 1..T
  std::vector<bool> resampled;      // whether step t resampled, t = 1..T
  Tensor log_evidence;              // L_T = sum of increments
  std::vector<ParticleEnsemble> ensembles;  // t = 0..T when retained

  Matrix mean_values() const;
  std::vector<double> increment_values() const;
};

/// i.i.d. draws from pi(x_0); log w = 0, W uniform, ESS = N.
ParticleEnsemble init_ensemble(const components::InitialDistribution& initial, Index n, Rng& rng);

/// One step: resampling policy, proposal, log-space weight update, normalisation.
StepResult dpf_step(const ParticleEnsemble& prev, const Tensor& observation, const Eigen::VectorXd& action,
                    const FilterComponents& comps, const FilterConfig& config, Rng& rng);

/// Full recursion over y_{1:T} (rows of `observations`). `actions` may be empty.
FilterOutput run_filter(const Matrix& observations, const Matrix& actions, const FilterComponents& comps,
                        const FilterConfig& config, Rng& rng);
FilterOutput run_filter(const ssm::Trajectory& traj, const FilterComponents& comps, const FilterConfig& config,
                        Rng& rng);

/// sum_i W_i psi(x_i); psi maps N x d particles to N x k values. Returns 1 x k.
Tensor estimate(const ParticleEnsemble& ensemble, const std::function<Tensor(const Tensor&)>& psi = {});

}  // namespace dpf::filter

#endif  // DPF_FILTER_FILTER_HPP_
