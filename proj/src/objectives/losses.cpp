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

#include "dpf/objectives/losses.hpp"

#include <cmath>

#include "dpf/error.hpp"

namespace dpf::objectives {

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: nothing to stack");
  return ad::concat(std::span<const Tensor>(rows), ad::Axis::Rows);
}

Tensor rmse_loss(const std::vector<Tensor>& estimates, const Matrix& truth) {
  const Tensor est = stack_rows(estimates);
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw ShapeError("rmse_loss: estimates and truth differ in length or width");
  }
  return ad::sqrt(ad::sum(ad::square(est - Tensor(truth))) / static_cast<double>(truth.rows()));
}

Tensor gmm_loglik_loss(const std::vector<filter::ParticleEnsemble>& ensembles, const Matrix& truth,
                       const Eigen::VectorXd& sigma_diag) {
  if (static_cast<Index>(ensembles.size()) != truth.rows()) {
    throw ShapeError("gmm_loglik_loss: one ensemble per truth row required");
  }
  if (sigma_diag.size() != truth.cols() || !(sigma_diag.array() > 0.0).all()) {
    throw ConfigError("gmm_sigma must have one positive entry per state dimension");
  }
  const double half_log_det = 0.5 * sigma_diag.array().log().sum();
  const Tensor inv_sigma(Matrix(sigma_diag.cwiseInverse().transpose()));
  Tensor total;
  for (Index t = 0; t < truth.rows(); ++t) {
    const auto& e = ensembles[static_cast<std::size_t>(t)];
    const Tensor diff = e.particles - Tensor(Matrix(truth.row(t)));
    const Tensor quad = ad::sum(ad::square(diff) * inv_sigma, ad::Axis::Cols);
    const Tensor term = ad::logsumexp(e.log_norm_weights - half_log_det - 0.5 * quad);
    total = total.defined() ? total + term : term;
  }
  return -total / static_cast<double>(truth.rows());
}

Tensor elbo_loss(const filter::FilterOutput& out) {
  if (!out.log_evidence.defined()) throw ShapeError("elbo_loss: filter output has no log evidence");
  return -out.log_evidence;
}

Tensor pose_loss(const std::vector<Tensor>& estimates, const Matrix& truth, double heading_weight) {
  const Tensor est = stack_rows(estimates);
  if (est.rows() != truth.rows() || est.cols() != 3 || truth.cols() != 3) {
    throw ShapeError("pose_loss expects (T+1) x 3 estimates and truth");
  }
  const Tensor err = est - Tensor(truth);
  const Tensor pos = ad::sum(ad::square(ad::slice_cols(err, 0, 2)));
  const Tensor heading = ad::sum(ad::square(ad::wrap_angle(ad::slice_cols(err, 2, 1))));
  return pos + heading_weight * heading;
}

Tensor block_elbo_loss(const Matrix& observations, const Matrix& actions, Index block, const BlockSpec& blocks,
                       const filter::FilterComponents& comps, const filter::FilterConfig& config, Rng& rng) {
  if (blocks.length < 1 || blocks.count < 1) throw ConfigError("block_len and block_count must be at least 1");
  if (blocks.length * blocks.count > observations.rows()) {
    throw ConfigError("block_len * block_count exceeds the number of observations");
  }
  if (block < 0 || block >= blocks.count) throw ConfigError("block index out of range");
  const Index begin = block * blocks.length;
  const Matrix ys = observations.middleRows(begin, blocks.length);
  const Matrix as = actions.size() > 0 ? Matrix(actions.middleRows(begin, blocks.length)) : Matrix();
  return elbo_loss(filter::run_filter(ys, as, comps, config, rng));
}

Tensor pseudo_likelihood_loss(const Matrix& observations, const Matrix& actions, const BlockSpec& blocks,
                              const filter::FilterComponents& comps, const filter::FilterConfig& config, Rng& rng) {
  Tensor total;
  for (Index b = 0; b < blocks.count; ++b) {
    const Tensor l = block_elbo_loss(observations, actions, b, blocks, comps, config, rng);
    total = total.defined() ? total + l : l;
  }
  return total;
}

Tensor combined_objective(const Tensor& supervised_loss, const Tensor& pseudo_loss, double lambda1, double lambda2,
                          Index block_count, bool supervised) {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be non-negative");
  if (block_count < 1) throw ConfigError("block_count must be at least 1");
  Tensor total = (lambda2 / static_cast<double>(block_count)) * pseudo_loss;
  if (supervised && supervised_loss.defined()) total = lambda1 * supervised_loss + total;
  return total;
}

}  // namespace dpf::objectives
