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

#ifndef DPF_OBJECTIVES_LOSSES_HPP_
#define DPF_OBJECTIVES_LOSSES_HPP_

#include <vector>

#include "dpf/filter/filter.hpp"

namespace dpf::objectives {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

/// Stacks 1 x d rows into a T x d tensor.
Tensor stack_rows(const std::vector<Tensor>& rows);

/// sqrt((1 / (T+1)) sum_t ||x*_t - x_bar_t||^2); estimates and truth both hold t = 0..T.
Tensor rmse_loss(const std::vector<Tensor>& estimates, const Matrix& truth);

/// -(1 / (T+1)) sum_t log sum_i W_t^i |Sigma|^{-1/2} exp(-(x*_t - x_t^i)' Sigma^{-1} (x*_t - x_t^i) / 2)
/// with diagonal Sigma. The kernel carries no (2 pi)^{-d/2} factor.
Tensor gmm_loglik_loss(const std::vector<filter::ParticleEnsemble>& ensembles, const Matrix& truth,
                       const Eigen::VectorXd& sigma_diag);

/// -L_T.
Tensor elbo_loss(const filter::FilterOutput& out);

/// sum_t (s1_bar - s1*)^2 + (s2_bar - s2*)^2 + heading_weight * wrap(eta_bar - eta*)^2.
Tensor pose_loss(const std::vector<Tensor>& estimates, const Matrix& truth, double heading_weight);

struct BlockSpec {
  Index length = 1;  // L
  Index count = 1;   // m
};

/// -L_T of a filter restarted from pi(x_0) on observations y_{bL+1..(b+1)L}.
Tensor block_elbo_loss(const Matrix& observations, const Matrix& actions, Index block, const BlockSpec& blocks,
                       const filter::FilterComponents& comps, const filter::FilterConfig& config, Rng& rng);

/// Sum over the m blocks of block_elbo_loss, i.e. minus the log pseudo-likelihood estimate.
Tensor pseudo_likelihood_loss(const Matrix& observations, const Matrix& actions, const BlockSpec& blocks,
                              const filter::FilterComponents& comps, const filter::FilterConfig& config, Rng& rng);

/// lambda1 * supervised + (lambda2 / m) * pseudo; the supervised term is dropped
/// when `supervised` is false or the tensor is undefined.
Tensor combined_objective(const Tensor& supervised_loss, const Tensor& pseudo_loss, double lambda1, double lambda2,
                          Index block_count, bool supervised);

}  // namespace dpf::objectives

#endif  // DPF_OBJECTIVES_LOSSES_HPP_
