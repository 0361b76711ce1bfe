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

#include "dpf/ssm/simulate.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "dpf/error.hpp"
#include "dpf/ssm/planar_world.hpp"

namespace dpf::ssm {
namespace {

void check_finite(const VectorXd& v, const char* what, Index t) {
  if (!v.allFinite()) throw NumericError(std::string("simulate: non-finite ") + what + " at step " + std::to_string(t));
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, Index steps, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("simulate: steps must be at least 1");
  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(steps + 1, model.state_dim());
  traj.observations.resize(steps, model.obs_dim());
  traj.actions.resize(model.action_dim() > 0 ? steps : 0, model.action_dim());

  VectorXd x = model.sample_initial(rng);
  check_finite(x, "state", 0);
  traj.states.row(0) = x.transpose();
  for (Index t = 1; t <= steps; ++t) {
    const VectorXd a = model.sample_action(t, x, rng);
    if (model.action_dim() > 0) traj.actions.row(t - 1) = a.transpose();
    x = model.sample_transition(x, a, rng);
    check_finite(x, "state", t);
    const VectorXd y = model.sample_observation(x, rng);
    check_finite(y, "observation", t);
    traj.states.row(t) = x.transpose();
    traj.observations.row(t - 1) = y.transpose();
  }
  return traj;
}

Dataset make_dataset(const StateSpaceModel& model, Index count, Index steps, std::uint64_t seed, int workers) {
  if (count < 1) throw ConfigError("make_dataset: count must be at least 1");
  Dataset ds;
  ds.model_id = model.id();
  ds.state_dim = model.state_dim();
  ds.obs_dim = model.obs_dim();
  ds.action_dim = model.action_dim();
  ds.steps = steps;
  ds.seed = seed;
  ds.trajectories.resize(static_cast<std::size_t>(count));
  if (const auto* planar = dynamic_cast<const PlanarWorldSsm*>(&model)) ds.map = planar->world().map;

  const auto n = static_cast<std::size_t>(count);
  const auto threads = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) ds.trajectories[i] = simulate(model, steps, derive_seed(seed, i));
    return ds;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) ds.trajectories[i] = simulate(model, steps, derive_seed(seed, i));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ds;
}

}  // namespace dpf::ssm
