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

#ifndef DPF_RESAMPLING_RESAMPLING_HPP_
#define DPF_RESAMPLING_RESAMPLING_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpf/ad/ops.hpp"
#include "dpf/random.hpp"

namespace dpf::resampling {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

/// 1 / sum W_i^2 for normalised weights W.
template <typename Derived>
typename Derived::Scalar effective_sample_size(const Eigen::MatrixBase<Derived>& weights) {
  return typename Derived::Scalar(1) / weights.squaredNorm();
}

/// Normalised weights from log-weights, max-shifted.
Eigen::VectorXd normalise_log_weights(const Eigen::VectorXd& log_w);

/// Inverse-CDF draws of `count` indices from the categorical distribution W.
std::vector<Index> multinomial_ancestors(const Eigen::VectorXd& weights, Index count, Rng& rng);

struct ResampleResult {
  Tensor particles;             // N x d after resampling
  Tensor log_weights;           // N x 1 unnormalised log w~
  std::vector<Index> ancestors; // A_i; identity when nothing was resampled
  bool resampled = false;
};

/// Ancestors from W; every new weight is 1.
ResampleResult multinomial_resample(const Tensor& particles, const Tensor& log_w, Rng& rng);

/// Ancestors from W; every new weight is the mean of the old unnormalised weights.
ResampleResult weight_preserving_resample(const Tensor& particles, const Tensor& log_w, Rng& rng);

/// Ancestors from W~ = lambda W + (1 - lambda) / N; drawn index i carries W_i / W~_i.
ResampleResult soft_resample(const Tensor& particles, const Tensor& log_w, double lambda, Rng& rng);

struct SinkhornSettings {
  double epsilon = 0.1;  // regularisation, relative to the mean pairwise cost
  int max_iter = 500;
  double tol = 1e-8;     // max marginal residual
};

struct TransportPlan {
  Tensor plan;          // N x N; rows sum to 1/N, columns to W
  double residual = 0;  // max absolute marginal error of the returned plan
  int iterations = 0;
  bool converged = false;
};

/// Entropy-regularised coupling between the uniform measure on the particles
/// and the W-weighted one, by log-domain Sinkhorn iterations on the tape.
/// Cost is squared Euclidean distance divided by its mean over all pairs.
TransportPlan sinkhorn_plan(const Tensor& particles, const Tensor& log_w, const SinkhornSettings& settings);

/// Barycentric projection N P X; weights become uniform (log w~ = 0).
ResampleResult ot_resample(const Tensor& particles, const Tensor& log_w, const SinkhornSettings& settings);

enum class Scheme { None, Multinomial, WeightPreserving, Soft, Ot };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

struct ResamplePolicy {
  Scheme scheme = Scheme::Multinomial;
  double ess_min_frac = 0.5;  // ESS_min = ess_min_frac * N
  double soft_lambda = 0.5;
  SinkhornSettings ot;
};

/// Resamples when ESS(W) < ESS_min (strict); otherwise passes particles and
/// weights through unchanged with identity ancestors.
ResampleResult resample_policy(const Tensor& particles, const Tensor& log_w, const ResamplePolicy& policy, Rng& rng);

}  // namespace dpf::resampling

#endif  // DPF_RESAMPLING_RESAMPLING_HPP_
