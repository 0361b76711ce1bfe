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

#include "dpf/components/dynamic.hpp"

#include <cmath>
#include <numbers>

#include "dpf/error.hpp"

namespace dpf::components {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_finite(const Tensor& t, const std::string& who) {
  if (!t.all_finite()) throw NumericError(who + ": non-finite output");
}

}  // namespace

GaussianDynamic::GaussianDynamic(ad::ParamStore& store, const std::string& prefix, const GaussianDynamicSpec& spec,
                                 Rng& rng)
    : spec_(spec) {
  if (spec.dim < 1) throw ConfigError("dynamic state width must be positive");
  if (!(spec.init_std > 0.0)) throw ConfigError("dynamic noise std must be positive");
  const Index d = spec.dim;
  if (spec.mean == MeanKind::Linear) {
    a_ = store.add(prefix + ".A", spec.init_coefficient * Matrix::Identity(d, d));
  } else {
    residual_ = ad::Mlp::create(store, prefix + ".mean", {{d, spec.hidden, d}, ad::Activation::Tanh}, rng,
                                ad::MlpInit::ZeroFinalLayer);
  }
  const Matrix init = Matrix::Constant(1, d, std::log(spec.init_std));
  if (spec.heteroscedastic) {
    gamma_ = ad::Mlp::create(store, prefix + ".gamma", {{d, spec.hidden, d}, ad::Activation::Tanh}, rng,
                             ad::MlpInit::ZeroFinalLayer);
    // Output bias carries the initial log-std, so an untrained net predicts init_std everywhere.
    Tensor bias = gamma_.biases().back();
    bias.mutable_value() = init;
  } else if (spec.learn_std) {
    log_std_ = store.add(prefix + ".log_std", init);
  } else {
    log_std_ = Tensor(init);
  }
}

Tensor GaussianDynamic::mean(const Tensor& x_prev) const {
  if (x_prev.cols() != spec_.dim) throw ShapeError("dynamic: particle width differs from state width");
  Tensor mu = spec_.mean == MeanKind::Linear ? ad::matmul(x_prev, a_) : x_prev + residual_.apply(x_prev);
  require_finite(mu, name() + " mean");
  return mu;
}

Tensor GaussianDynamic::log_std(const Tensor& x_prev, const StepContext& ctx) const {
  if (!spec_.heteroscedastic) return log_std_;
  const Tensor per_particle = gamma_.apply(x_prev);  // N x d log-std
  const Index n = x_prev.rows();
  const Tensor w = ctx.weights.defined() ? ctx.weights : Tensor(Matrix::Constant(n, 1, 1.0 / static_cast<double>(n)));
  if (w.rows() != n) throw ShapeError("gaussian_hetero: weight count differs from particle count");
  const Tensor var = ad::sum(w * ad::exp(per_particle * 2.0), ad::Axis::Rows);  // 1 x d
  return ad::log(var) * 0.5;
}

Tensor GaussianDynamic::diag_normal_log_density(const Tensor& x, const Tensor& mean, const Tensor& log_std) {
  const Tensor z = (x - mean) * ad::exp(-log_std);
  const Tensor per_dim = -0.5 * ad::square(z) - log_std - 0.5 * kLog2Pi;
  return ad::sum(per_dim, ad::Axis::Cols);
}

DynamicDraw GaussianDynamic::sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const {
  const Tensor mu = mean(x_prev);
  const Tensor ls = log_std(x_prev, ctx);
  const Tensor noise(rng.normal_matrix(x_prev.rows(), spec_.dim));
  const Tensor x = ad::reparam_gaussian(mu, ls, noise);
  require_finite(x, name());
  return {x, diag_normal_log_density(x, mu, ls)};
}

Tensor GaussianDynamic::log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const {
  if (x_new.rows() != x_prev.rows()) throw ShapeError("dynamic: x_new and x_prev row counts differ");
  return diag_normal_log_density(x_new, mean(x_prev), log_std(x_prev, ctx));
}

DynamicDraw FlowDynamic::sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const {
  const DynamicDraw base = base_->sample(x_prev, ctx, rng);
  const ad::FlowResult fwd = flow_.forward(base.x);
  return {fwd.y, base.log_density - fwd.log_det};
}

Tensor FlowDynamic::log_density(const Tensor& x_new, const Tensor& x_prev, const StepContext& ctx) const {
  const ad::FlowResult inv = flow_.inverse(x_new);
  return base_->log_density(inv.y, x_prev, ctx) + inv.log_det;
}

DynamicDraw RobotMotion::sample(const Tensor& x_prev, const StepContext& ctx, Rng& rng) const {
  if (x_prev.cols() != 3) throw ShapeError("robot_motion expects N x 3 poses");
  if (ctx.action.size() != 3) throw ShapeError("robot_motion needs a 3-wide action at every step");
  Matrix noise = rng.normal_matrix(x_prev.rows(), 3);
  for (Index j = 0; j < 3; ++j) noise.col(j) *= sigma_(j);
  const Tensor x = ssm::robot_transition(x_prev, ctx.action.head<3>(), Tensor(noise));
  require_finite(x, name());
  return {x, Tensor()};
}

Tensor RobotMotion::log_density(const Tensor&, const Tensor&, const StepContext&) const {
  throw DomainError("robot_motion has no tractable transition density; use it with a bootstrap proposal");
}

Matrix InitialDistribution::sample(Index n, Rng& rng) const {
  Matrix x = rng.normal_matrix(n, mean.size());
  for (Index j = 0; j < mean.size(); ++j) x.col(j) = (x.col(j) * std(j)).array() + mean(j);
  return x;
}

Eigen::VectorXd InitialDistribution::log_density(const Matrix& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (Index j = 0; j < mean.size(); ++j) {
    const Eigen::ArrayXd z = (x.col(j).array() - mean(j)) / std(j);
    out.array() += -0.5 * z.square() - std::log(std(j)) - 0.5 * kLog2Pi;
  }
  return out;
}

}  // namespace dpf::components
