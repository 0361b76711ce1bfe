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

#include "dpf/filter/filter.hpp"

#include <cmath>
#include <string>

#include "dpf/error.hpp"

namespace dpf::filter {
namespace {

bool has_nan(const Tensor& t) { return t.defined() && t.value().array().isNaN().any(); }

Eigen::VectorXd as_vector(const Tensor& t) { return Eigen::Map<const Eigen::VectorXd>(t.value().data(), t.size()); }

}  // namespace

Eigen::VectorXd ParticleEnsemble::weights() const { return as_vector(log_norm_weights).array().exp(); }

Matrix FilterOutput::mean_values() const {
  if (means.empty()) return {};
  Matrix out(static_cast<Index>(means.size()), means.front().cols());
  for (std::size_t t = 0; t < means.size(); ++t) out.row(static_cast<Index>(t)) = means[t].value();
  return out;
}

std::vector<double> FilterOutput::increment_values() const {
  std::vector<double> out;
  out.reserve(increments.size());
  for (const auto& l : increments) out.push_back(l.item());
  return out;
}

ParticleEnsemble init_ensemble(const components::InitialDistribution& initial, Index n, Rng& rng) {
  if (n < 1) throw ConfigError("num_particles must be at least 1");
  ParticleEnsemble e;
  e.particles = Tensor(initial.sample(n, rng));
  e.log_weights = Tensor::zeros(n, 1);
  e.log_norm_weights = Tensor::constant(n, 1, -std::log(static_cast<double>(n)));
  e.ancestors.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) e.ancestors[static_cast<std::size_t>(i)] = i;
  e.ess = static_cast<double>(n);
  return e;
}

StepResult dpf_step(const ParticleEnsemble& prev, const Tensor& observation, const Eigen::VectorXd& action,
                    const FilterComponents& comps, const FilterConfig& config, Rng& rng) {
  const Index t = prev.t + 1;
  Tensor particles = prev.particles;
  Tensor log_w = prev.log_weights;
  if (config.tbptt) {
    particles = ad::stop_gradient(particles);
    log_w = ad::stop_gradient(log_w);
  }
  const resampling::ResampleResult res = resampling::resample_policy(particles, log_w, config.resample, rng);

  components::StepContext ctx;
  ctx.t = t;
  ctx.observation = observation;
  ctx.action = action;
  ctx.weights = ad::softmax(res.log_weights, ad::Axis::Rows);

  const components::ProposalDraw draw = comps.proposal->propose(*comps.dynamic, res.particles, ctx, rng);
  const Tensor log_lik = comps.measurement->log_likelihood(observation, draw.x);

  const auto where = " at step " + std::to_string(t);
  if (has_nan(draw.x) || has_nan(draw.log_q)) throw NumericError("NaN from proposal " + comps.proposal->name() + where);
  if (has_nan(draw.log_p)) throw NumericError("NaN from dynamic " + comps.dynamic->name() + where);
  if (has_nan(log_lik)) throw NumericError("NaN from measurement " + comps.measurement->name() + where);

  Tensor log_w_new = res.log_weights + log_lik;
  if (draw.log_p.defined()) log_w_new = log_w_new + draw.log_p - draw.log_q;
  if (has_nan(log_w_new)) throw NumericError("NaN in the weight update" + where);

  const Tensor lse_new = ad::logsumexp(log_w_new);
  if (std::isinf(lse_new.item()) && lse_new.item() < 0) {
    throw NumericError("every particle has zero weight" + where);
  }

  StepResult out;
  out.increment = lse_new - ad::logsumexp(res.log_weights);
  ParticleEnsemble& e = out.ensemble;
  e.particles = draw.x;
  e.log_weights = log_w_new;
  e.log_norm_weights = log_w_new - lse_new;
  e.ancestors = res.ancestors;
  e.resampled = res.resampled;
  e.t = t;
  e.ess = resampling::effective_sample_size(e.weights());
  return out;
}

Tensor estimate(const ParticleEnsemble& ensemble, const std::function<Tensor(const Tensor&)>& psi) {
  const Tensor values = psi ? psi(ensemble.particles) : ensemble.particles;
  if (values.rows() != ensemble.size()) throw ShapeError("estimate: psi must return one row per particle");
  return ad::sum(ad::exp(ensemble.log_norm_weights) * values, ad::Axis::Rows);
}

FilterOutput run_filter(const Matrix& observations, const Matrix& actions, const FilterComponents& comps,
                        const FilterConfig& config, Rng& rng) {
  const Index steps = observations.rows();
  if (steps < 1) throw ConfigError("run_filter needs at least one observation");
  if (actions.size() > 0 && actions.rows() != steps) throw ShapeError("run_filter: one action row per observation");

  FilterOutput out;
  ParticleEnsemble e = init_ensemble(config.initial ? *config.initial : comps.initial, config.num_particles, rng);
  out.means.push_back(estimate(e));
  out.ess.push_back(e.ess);
  if (config.retain_ensembles) out.ensembles.push_back(e);
  for (Index t = 1; t <= steps; ++t) {
    const Tensor y(Matrix(observations.row(t - 1)));
    const Eigen::VectorXd a = actions.size() > 0 ? Eigen::VectorXd(actions.row(t - 1).transpose()) : Eigen::VectorXd();
    StepResult step = dpf_step(e, y, a, comps, config, rng);
    out.resampled.push_back(step.ensemble.resampled);
    e = std::move(step.ensemble);
    out.means.push_back(estimate(e));
    out.ess.push_back(e.ess);
    out.log_evidence = out.log_evidence.defined() ? out.log_evidence + step.increment : step.increment;
    out.increments.push_back(step.increment);
    if (config.retain_ensembles) out.ensembles.push_back(e);
  }
  return out;
}

FilterOutput run_filter(const ssm::Trajectory& traj, const FilterComponents& comps, const FilterConfig& config,
                        Rng& rng) {
  return run_filter(traj.observations, traj.actions, comps, config, rng);
}

}  // namespace dpf::filter
