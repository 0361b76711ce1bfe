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

#ifndef DPF_COMPONENTS_PROPOSAL_HPP_
#define DPF_COMPONENTS_PROPOSAL_HPP_

#include "dpf/components/dynamic.hpp"

namespace dpf::components {

struct ProposalDraw {
  Tensor x;      // N x d_X
  Tensor log_q;  // N x 1
  /// log p(x | x_prev) under the dynamic model, or undefined when p and q cancel
  /// in the weight update (bootstrap).
  Tensor log_p;
};

/// Proposal q(x_t | y_t, x_{t-1}; phi).
class ProposalModel {
 public:
  virtual ~ProposalModel() = default;
  virtual std::string name() const = 0;
  virtual ProposalDraw propose(const DynamicModel& dyn, const Tensor& x_prev, const StepContext& ctx,
                               Rng& rng) const = 0;
  virtual Tensor log_density(const DynamicModel& dyn, const Tensor& x_new, const Tensor& x_prev,
                             const StepContext& ctx) const = 0;
};

/// q = p: particles come straight from the dynamic model.
class BootstrapProposal final : public ProposalModel {
 public:
  std::string name() const override { return "bootstrap"; }
  ProposalDraw propose(const DynamicModel& dyn, const Tensor& x_prev, const StepContext& ctx,
                       Rng& rng) const override;
  Tensor log_density(const DynamicModel& dyn, const Tensor& x_new, const Tensor& x_prev,
                     const StepContext& ctx) const override;
};

/// x = G(x_check, y), x_check drawn from the dynamic model; G is a conditional
/// coupling flow reading the observation.
class FlowProposal final : public ProposalModel {
 public:
  explicit FlowProposal(ad::CouplingFlow flow) : flow_(std::move(flow)) {}

  std::string name() const override { return "cnf_proposal"; }
  ProposalDraw propose(const DynamicModel& dyn, const Tensor& x_prev, const StepContext& ctx,
                       Rng& rng) const override;
  Tensor log_density(const DynamicModel& dyn, const Tensor& x_new, const Tensor& x_prev,
                     const StepContext& ctx) const override;

  const ad::CouplingFlow& flow() const { return flow_; }

 private:
  ad::CouplingFlow flow_;
};

}  // namespace dpf::components

#endif  // DPF_COMPONENTS_PROPOSAL_HPP_
