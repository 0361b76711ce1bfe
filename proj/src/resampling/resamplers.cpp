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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpf/error.hpp"
#include "dpf/resampling/resampling.hpp"

namespace dpf::resampling {
namespace {

Eigen::VectorXd column_values(const Tensor& t) { return Eigen::Map<const Eigen::VectorXd>(t.value().data(), t.size()); }

void check_inputs(const Tensor& particles, const Tensor& log_w) {
  if (log_w.cols() != 1 || log_w.rows() != particles.rows()) {
    throw ShapeError("resampling expects N x d particles and N x 1 log-weights");
  }
  if (particles.rows() < 1) throw ShapeError("resampling needs at least one particle");
}

std::vector<Index> identity_indices(Index n) {
  std::vector<Index> a(static_cast<std::size_t>(n));
  std::iota(a.begin(), a.end(), Index{0});
  return a;
}

}  // namespace

Eigen::VectorXd normalise_log_weights(const Eigen::VectorXd& log_w) {
  const double m = log_w.maxCoeff();
  if (!std::isfinite(m)) throw NumericError("cannot normalise weights: maximum log-weight is not finite");
  Eigen::VectorXd w = (log_w.array() - m).exp();
  return w / w.sum();
}

std::vector<Index> multinomial_ancestors(const Eigen::VectorXd& weights, Index count, Rng& rng) {
  const Index n = weights.size();
  std::vector<double> cdf(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (!(weights(i) >= 0.0)) throw DomainError("multinomial draw needs non-negative weights");
    acc += weights(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  if (!(acc > 0.0)) throw DomainError("multinomial draw needs a positive total weight");
  Index last = n - 1;
  while (last > 0 && weights(last) == 0.0) --last;
  std::vector<Index> out(static_cast<std::size_t>(count));
  for (auto& a : out) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    a = std::min(static_cast<Index>(it - cdf.begin()), last);
  }
  return out;
}

ResampleResult multinomial_resample(const Tensor& particles, const Tensor& log_w, Rng& rng) {
  check_inputs(particles, log_w);
  const Index n = particles.rows();
  ResampleResult r;
  r.ancestors = multinomial_ancestors(normalise_log_weights(column_values(log_w)), n, rng);
  r.particles = ad::gather_rows(particles, r.ancestors);
  r.log_weights = Tensor::zeros(n, 1);
  r.resampled = true;
  return r;
}

ResampleResult weight_preserving_resample(const Tensor& particles, const Tensor& log_w, Rng& rng) {
  check_inputs(particles, log_w);
  const Index n = particles.rows();
  ResampleResult r;
  r.ancestors = multinomial_ancestors(normalise_log_weights(column_values(log_w)), n, rng);
  r.particles = ad::gather_rows(particles, r.ancestors);
  const Tensor log_mean = ad::logsumexp(log_w) - std::log(static_cast<double>(n));
  r.log_weights = Tensor::zeros(n, 1) + log_mean;
  r.resampled = true;
  return r;
}

ResampleResult soft_resample(const Tensor& particles, const Tensor& log_w, double lambda, Rng& rng) {
  check_inputs(particles, log_w);
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("soft_lambda must lie in (0, 1]");
  const Index n = particles.rows();
  const Tensor log_big_w = ad::log_softmax(log_w, ad::Axis::Rows);
  const Tensor big_w = ad::exp(log_big_w);
  const Tensor mixed = lambda * big_w + (1.0 - lambda) / static_cast<double>(n);
  ResampleResult r;
  r.ancestors = multinomial_ancestors(column_values(mixed), n, rng);
  r.particles = ad::gather_rows(particles, r.ancestors);
  // Gather before the log so undrawn zero-weight entries never enter it.
  r.log_weights = ad::gather_rows(log_big_w, r.ancestors) - ad::log(ad::gather_rows(mixed, r.ancestors));
  r.resampled = true;
  return r;
}

ResampleResult ot_resample(const Tensor& particles, const Tensor& log_w, const SinkhornSettings& settings) {
  check_inputs(particles, log_w);
  const Index n = particles.rows();
  const TransportPlan tp = sinkhorn_plan(particles, log_w, settings);
  ResampleResult r;
  r.particles = ad::matmul(tp.plan, particles) * static_cast<double>(n);
  r.log_weights = Tensor::zeros(n, 1);
  r.ancestors = identity_indices(n);
  r.resampled = true;
  return r;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "none") return Scheme::None;
  if (name == "multinomial") return Scheme::Multinomial;
  if (name == "weight_preserving") return Scheme::WeightPreserving;
  if (name == "soft") return Scheme::Soft;
  if (name == "ot") return Scheme::Ot;
  throw ConfigError("unknown resampler \"" + name + "\"; valid: none, multinomial, weight_preserving, soft, ot");
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::None: return "none";
    case Scheme::Multinomial: return "multinomial";
    case Scheme::WeightPreserving: return "weight_preserving";
    case Scheme::Soft: return "soft";
    case Scheme::Ot: return "ot";
  }
  return "none";
}

ResampleResult resample_policy(const Tensor& particles, const Tensor& log_w, const ResamplePolicy& policy,
                               Rng& rng) {
  check_inputs(particles, log_w);
  const Index n = particles.rows();
  const double ess = effective_sample_size(normalise_log_weights(column_values(log_w)));
  // Uniform weights give ESS = N only up to rounding; keep that boundary on the no-resample side.
  const double threshold = policy.ess_min_frac * static_cast<double>(n) * (1.0 - 1e-12);
  if (policy.scheme == Scheme::None || !(ess < threshold)) {
    return {particles, log_w, identity_indices(n), false};
  }
  switch (policy.scheme) {
    case Scheme::Multinomial: return multinomial_resample(particles, log_w, rng);
    case Scheme::WeightPreserving: return weight_preserving_resample(particles, log_w, rng);
    case Scheme::Soft: return soft_resample(particles, log_w, policy.soft_lambda, rng);
    case Scheme::Ot: return ot_resample(particles, log_w, policy.ot);
    case Scheme::None: break;
  }
  return {particles, log_w, identity_indices(n), false};
}

}  // namespace dpf::resampling
