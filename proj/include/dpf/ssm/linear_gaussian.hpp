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

#ifndef DPF_SSM_LINEAR_GAUSSIAN_HPP_
#define DPF_SSM_LINEAR_GAUSSIAN_HPP_

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "dpf/error.hpp"
#include "dpf/ssm/model.hpp"

namespace dpf::ssm {

/// Scalar linear-Gaussian model
///   x_0 ~ N(init_mean, init_var), x_t ~ N(theta1 x_{t-1}, trans_var), y_t ~ N(theta2 x_t, obs_var).
template <typename Scalar>
struct LinearGaussianParams {
  Scalar theta1 = Scalar(0.9);
  Scalar theta2 = Scalar(1.0);
  Scalar init_mean = Scalar(0);
  Scalar init_var = Scalar(1);
  Scalar trans_var = Scalar(1);
  Scalar obs_var = Scalar(0.1);
};

template <typename Scalar>
Scalar normal_log_density(Scalar x, Scalar mean, Scalar var) {
  using std::log;
  const Scalar r = x - mean;
  return Scalar(-0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar> * var) - r * r / (Scalar(2) * var);
}

template <typename Scalar>
struct KalmanResult {
  std::vector<Scalar> means;          // filtering means, index t = 0..T
  std::vector<Scalar> variances;      // filtering variances, index t = 0..T
  std::vector<Scalar> increments;     // log p(y_t | y_{1:t-1}), index t-1
  Scalar log_evidence = Scalar(0);    // sum of increments
};

/// Exact predict/update recursion and log evidence of the scalar model.
template <typename Scalar>
KalmanResult<Scalar> kalman_filter(const LinearGaussianParams<Scalar>& p, std::span<const Scalar> ys) {
  KalmanResult<Scalar> out;
  Scalar m = p.init_mean;
  Scalar v = p.init_var;
  out.means.push_back(m);
  out.variances.push_back(v);
  for (const Scalar y : ys) {
    const Scalar m_pred = p.theta1 * m;
    const Scalar v_pred = p.theta1 * p.theta1 * v + p.trans_var;
    const Scalar s = p.theta2 * p.theta2 * v_pred + p.obs_var;
    if (!(s > Scalar(0))) throw NumericError("kalman_filter: non-positive predictive variance");
    const Scalar l = normal_log_density(y, p.theta2 * m_pred, s);
    out.increments.push_back(l);
    out.log_evidence += l;
    const Scalar gain = v_pred * p.theta2 / s;
    m = m_pred + gain * (y - p.theta2 * m_pred);
    v = (Scalar(1) - gain * p.theta2) * v_pred;
    out.means.push_back(m);
    out.variances.push_back(v);
  }
  return out;
}

class LinearGaussianSsm final : public StateSpaceModel {
 public:
  explicit LinearGaussianSsm(LinearGaussianParams<double> params = {}) : params_(params) {}

  std::string id() const override { return "lgssm"; }
  Index state_dim() const override { return 1; }
  Index obs_dim() const override { return 1; }

  VectorXd sample_initial(Rng& rng) const override;
  VectorXd sample_transition(const VectorXd& state, const VectorXd& action, Rng& rng) const override;
  VectorXd sample_observation(const VectorXd& state, Rng& rng) const override;

  double initial_log_density(double x) const { return normal_log_density(x, params_.init_mean, params_.init_var); }
  double transition_log_density(double x_new, double x) const {
    return normal_log_density(x_new, params_.theta1 * x, params_.trans_var);
  }
  double observation_log_density(double y, double x) const {
    return normal_log_density(y, params_.theta2 * x, params_.obs_var);
  }

  const LinearGaussianParams<double>& params() const { return params_; }

 private:
  LinearGaussianParams<double> params_;
};

/// Kalman pass over the observations of a scalar trajectory.
KalmanResult<double> kalman_filter(const LinearGaussianParams<double>& p, const Trajectory& traj);

}  // namespace dpf::ssm

#endif  // DPF_SSM_LINEAR_GAUSSIAN_HPP_
