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

#include <cmath>

#include "dpf/error.hpp"
#include "dpf/resampling/resampling.hpp"

namespace dpf::resampling {
namespace {

// Largest deviation of the plan's row sums from 1/N and column sums from W.
double marginal_residual(const Matrix& plan, const Eigen::VectorXd& weights) {
  const double n = static_cast<double>(plan.rows());
  const double rows = (plan.rowwise().sum().array() - 1.0 / n).abs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - weights).array().abs().maxCoeff();
  return std::max(rows, cols);
}

}  // namespace

TransportPlan sinkhorn_plan(const Tensor& particles, const Tensor& log_w, const SinkhornSettings& settings) {
  if (!(settings.epsilon > 0.0)) throw ConfigError("ot_epsilon must be positive");
  if (settings.max_iter < 1) throw ConfigError("ot_max_iter must be at least 1");
  if (log_w.cols() != 1 || log_w.rows() != particles.rows()) {
    throw ShapeError("sinkhorn_plan expects N x d particles and N x 1 log-weights");
  }
  const Index n = particles.rows();
  const double eps = settings.epsilon;
  const double log_a = -std::log(static_cast<double>(n));

  // Pairwise squared distances, ||x_i||^2 + ||x_j||^2 - 2 x_i.x_j, scaled to unit mean.
  const Tensor sq = ad::sum(ad::square(particles), ad::Axis::Cols);
  Tensor cost = sq + ad::transpose(sq) - 2.0 * ad::matmul(particles, ad::transpose(particles));
  cost = ad::maximum(cost, 0.0);
  if (cost.value().mean() > 0.0) cost = cost / ad::mean(cost);
  const Tensor log_b = ad::transpose(ad::log_softmax(log_w, ad::Axis::Rows));  // 1 x N
  const Eigen::VectorXd weights = log_b.value().transpose().array().exp();

  const Tensor neg_cost = -cost / eps;
  Tensor f = Tensor::zeros(n, 1);
  Tensor g = Tensor::zeros(1, n);
  TransportPlan out;
  for (int k = 0; k < settings.max_iter; ++k) {
    f = eps * (log_a - ad::logsumexp(neg_cost + g / eps, ad::Axis::Cols));
    g = eps * (log_b - ad::logsumexp(neg_cost + f / eps, ad::Axis::Rows));
    out.iterations = k + 1;
    const Matrix plan = ((f.value().replicate(1, n) + g.value().replicate(n, 1)) / eps + neg_cost.value())
                            .array()
                            .exp()
                            .matrix();
    out.residual = marginal_residual(plan, weights);
    if (out.residual < settings.tol) {
      out.converged = true;
      break;
    }
  }
  out.plan = ad::exp(neg_cost + f / eps + g / eps);
  if (!out.plan.all_finite()) throw NumericError("sinkhorn_plan: non-finite transport plan");
  return out;
}

}  // namespace dpf::resampling
