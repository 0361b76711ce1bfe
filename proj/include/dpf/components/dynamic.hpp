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

#ifndef DPF_COMPONENTS_DYNAMIC_HPP_
#define DPF_COMPONENTS_DYNAMIC_HPP_

#include <memory>
#include <string>

#include "dpf/ad/flow.hpp"
#include "dpf/ad/nn.hpp"
#include "dpf/ssm/planar_world.hpp"

namespace dpf::components {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

/// Per-step inputs shared by all components.
struct StepContext {
  Index t = 0;
  Tensor observation;        // 1 x d_Y, y_t
  Eigen::VectorXd action;    // a_t, empty for models without actions
  Tensor weights;            // N x 1 normalised weights of the (possibly resampled) ancestors
};

struct DynamicDraw {
  Tensor x;            // N x d_X
  Tensor log_density;  // N x 1, log p(x | x_prev); undefined when the model has no tractable density
};

/// Transition model p(x_t | x_{t-1}; theta).
class DynamicModel {
 public:
  virtual ~DynamicModel() = default;
  virtual std::string name() const = 0;
  virtual Index state_dim() const = 0;
  virtual bool has_density() const { return true; }
  virtual DynamicDraw sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const = 0;
  virtual Tensor log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const = 0;
};

/// Mean function mu(x_prev) of a Gaussian transition.
enum class MeanKind {
  Linear,    // x A, with A a learnable d x d matrix
  Residual,  // x + MLP(x); the MLP output layer starts at zero
};

struct GaussianDynamicSpec {
  Index dim = 1;
  MeanKind mean = MeanKind::Linear;
  double init_coefficient = 1.0;  // A starts at this multiple of the identity
  double init_std = 1.0;
  bool learn_std = false;
  bool heteroscedastic = false;   // per-particle log-std from a net, mixed by ancestor weights
  Index hidden = 32;
};

/// Diagonal Gaussian transition x_t = mu(x_{t-1}) + sigma * noise. The
/// heteroscedastic form uses the shared covariance sum_i W_i diag(sigma_i^2)
/// with sigma_i predicted from x_{t-1}^i.
class GaussianDynamic final : public DynamicModel {
 public:
  GaussianDynamic(ad::ParamStore& store, const std::string& prefix, const GaussianDynamicSpec& spec, Rng& rng);

  std::string name() const override { return spec_.heteroscedastic ? "gaussian_hetero" : "gaussian_const"; }
  Index state_dim() const override { return spec_.dim; }
  DynamicDraw sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const override;
  Tensor log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const override;

  Tensor mean(const Tensor& x_prev) const;
  /// log-std of the transition noise: 1 x d (constant or mixed) for this step.
  Tensor log_std(const Tensor& x_prev, const StepContext& ctx) const;

  /// Log-density of diag N(mean, exp(log_std)^2), summed over columns; N x 1.
  static Tensor diag_normal_log_density(const Tensor& x, const Tensor& mean, const Tensor& log_std);

 private:
  GaussianDynamicSpec spec_;
  Tensor a_;
  ad::Mlp residual_;
  Tensor log_std_;
  ad::Mlp gamma_;
};

/// x_t = T(x~), x~ drawn from a base dynamic; density via the inverse flow.
class FlowDynamic final : public DynamicModel {
 public:
  FlowDynamic(std::unique_ptr<DynamicModel> base, ad::CouplingFlow flow)
      : base_(std::move(base)), flow_(std::move(flow)) {}

  std::string name() const override { return "flow_dynamic"; }
  Index state_dim() const override { return base_->state_dim(); }
  DynamicDraw sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const override;
  Tensor log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const override;

  const DynamicModel& base() const { return *base_; }
  const ad::CouplingFlow& flow() const { return flow_; }

 private:
  std::unique_ptr<DynamicModel> base_;
  ad::CouplingFlow flow_;
};

/// Planar robot motion driven by the step action, with fixed noise scales.
/// Sample-only: the heading noise enters the position nonlinearly, so there is
/// no closed-form density, and it is used with bootstrap proposals.
class RobotMotion final : public DynamicModel {
 public:
  RobotMotion(double sigma_s1, double sigma_s2, double sigma_heading)
      : sigma_{sigma_s1, sigma_s2, sigma_heading} {}

  std::string name() const override { return "robot_motion"; }
  Index state_dim() const override { return 3; }
  bool has_density() const override { return false; }
  DynamicDraw sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const override;
  Tensor log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const override;

 private:
  Eigen::Vector3d sigma_;
};

/// Fixed diagonal Gaussian initial distribution pi(x_0).
struct InitialDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  Matrix sample(Index n, Rng& rng) const;
  Eigen::VectorXd log_density(const Matrix& x) const;
};

}  // namespace dpf::components

#endif  // DPF_COMPONENTS_DYNAMIC_HPP_
