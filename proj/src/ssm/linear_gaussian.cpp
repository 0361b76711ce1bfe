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

#include "dpf/ssm/linear_gaussian.hpp"

namespace dpf::ssm {

VectorXd LinearGaussianSsm::sample_initial(Rng& rng) const {
  VectorXd x(1);
  x(0) = params_.init_mean + std::sqrt(params_.init_var) * rng.normal();
  return x;
}

VectorXd LinearGaussianSsm::sample_transition(const VectorXd& state, const VectorXd& /*action*/, Rng& rng) const {
  VectorXd x(1);
  x(0) = params_.theta1 * state(0) + std::sqrt(params_.trans_var) * rng.normal();
  return x;
}

VectorXd LinearGaussianSsm::sample_observation(const VectorXd& state, Rng& rng) const {
  VectorXd y(1);
  y(0) = params_.theta2 * state(0) + std::sqrt(params_.obs_var) * rng.normal();
  return y;
}

KalmanResult<double> kalman_filter(const LinearGaussianParams<double>& p, const Trajectory& traj) {
  if (traj.observations.cols() != 1) throw ShapeError("kalman_filter expects scalar observations");
  return kalman_filter<double>(
      p, std::span<const double>(traj.observations.data(), static_cast<std::size_t>(traj.observations.rows())));
}

}  // namespace dpf::ssm
