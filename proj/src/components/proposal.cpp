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

#include "dpf/components/proposal.hpp"

#include "dpf/error.hpp"

namespace dpf::components {

ProposalDraw BootstrapProposal::propose(const DynamicModel& dyn, const Tensor& x_prev, const StepContext& ctx,
                                        Rng& rng) const {
  DynamicDraw d = dyn.sample(x_prev, ctx, rng);
  return {d.x, d.log_density, Tensor()};
}

Tensor BootstrapProposal::log_density(const DynamicModel& dyn, const Tensor& x_new, const Tensor& x_prev,
                                      const StepContext& ctx) const {
  return dyn.log_density(x_new, x_prev, ctx);
}

ProposalDraw FlowProposal::propose(const DynamicModel& dyn, const Tensor& x_prev, const StepContext& ctx,
                                   Rng& rng) const {
  if (!dyn.has_density()) throw ConfigError("cnf_proposal needs a dynamic model with a tractable density");
  if (!ctx.observation.defined()) throw ShapeError("cnf_proposal needs the current observation");
  const DynamicDraw d = dyn.sample(x_prev, ctx, rng);
  const ad::FlowResult g = flow_.forward(d.x, ctx.observation);
  const Tensor log_q = d.log_density - g.log_det;
  return {g.y, log_q, dyn.log_density(g.y, x_prev, ctx)};
}

Tensor FlowProposal::log_density(const DynamicModel& dyn, const Tensor& x_new, const Tensor& x_prev,
                                 const StepContext& ctx) const {
  const ad::FlowResult inv = flow_.inverse(x_new, ctx.observation);
  return dyn.log_density(inv.y, x_prev, ctx) + inv.log_det;
}

}  // namespace dpf::components
