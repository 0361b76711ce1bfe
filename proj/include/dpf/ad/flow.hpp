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

#ifndef DPF_AD_FLOW_HPP_
#define DPF_AD_FLOW_HPP_

#include <string>
#include <vector>

#include "dpf/ad/nn.hpp"

namespace dpf::ad {

/// Log-scales produced by coupling nets are clamped to this range in both directions.
inline constexpr double kMaxLogScale = 7.0;

enum class FlowDirection { Forward, Inverse };

struct FlowSpec {
  Index dim = 1;        // width of the transformed variable
  Index cond_dim = 0;   // width of the optional conditioning input
  int depth = 4;        // number of coupling blocks
  Index hidden = 32;    // hidden width of the scale and shift nets
};

/// One affine coupling: the `transformed` dims are scaled and shifted by nets
/// that read the `conditioner` dims and the conditioning input.
struct FlowBlock {
  std::vector<Index> conditioner;
  std::vector<Index> transformed;
  std::vector<Index> inverse_permutation;  // maps [conditioner, transformed] back to dim order
  Index cond_width = 0;
  Mlp scale_net;
  Mlp shift_net;
};

struct FlowResult {
  Tensor y;
  Tensor log_det;  // N x 1, log|det dy/dx| of the applied direction
};

/// Stack of conditional affine couplings with alternating masks. Final layers of
/// the coupling nets start at zero, so a fresh flow is the identity.
class CouplingFlow {
 public:
  CouplingFlow() = default;

  static CouplingFlow create(ParamStore& store, const std::string& prefix, const FlowSpec& spec, Rng& rng);

  /// `cond` may be undefined when the flow has no conditioning input; a single
  /// conditioning row is broadcast over all samples.
  FlowResult apply(const Tensor& x, const Tensor& cond, FlowDirection direction) const;
  FlowResult forward(const Tensor& x, const Tensor& cond = {}) const {
    return apply(x, cond, FlowDirection::Forward);
  }
  FlowResult inverse(const Tensor& y, const Tensor& cond = {}) const {
    return apply(y, cond, FlowDirection::Inverse);
  }

  const FlowSpec& spec() const { return spec_; }
  const std::vector<FlowBlock>& blocks() const { return blocks_; }

 private:
  FlowResult apply_block(const FlowBlock& block, const Tensor& x, const Tensor& cond, FlowDirection dir) const;

  FlowSpec spec_;
  std::vector<FlowBlock> blocks_;
};

/// Free-function form of CouplingFlow::apply.
inline FlowResult coupling_apply(const CouplingFlow& flow, const Tensor& x, const Tensor& cond,
                                 FlowDirection direction) {
  return flow.apply(x, cond, direction);
}

}  // namespace dpf::ad

#endif  // DPF_AD_FLOW_HPP_
