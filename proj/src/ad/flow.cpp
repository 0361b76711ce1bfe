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

#include "dpf/ad/flow.hpp"

#include "dpf/error.hpp"

namespace dpf::ad {

CouplingFlow CouplingFlow::create(ParamStore& store, const std::string& prefix, const FlowSpec& spec, Rng& rng) {
  if (spec.dim < 1) throw ConfigError("flow '" + prefix + "' needs a positive dimension");
  if (spec.depth < 1) throw ConfigError("flow '" + prefix + "' needs at least one coupling block");
  CouplingFlow flow;
  flow.spec_ = spec;
  for (int k = 0; k < spec.depth; ++k) {
    FlowBlock block;
    block.cond_width = spec.cond_dim;
    for (Index i = 0; i < spec.dim; ++i) {
      // A 1-D variable has nothing to condition on; every block transforms it.
      const bool transform = spec.dim == 1 || (i + k) % 2 == 1;
      (transform ? block.transformed : block.conditioner).push_back(i);
    }
    std::vector<Index> order = block.conditioner;
    order.insert(order.end(), block.transformed.begin(), block.transformed.end());
    block.inverse_permutation.resize(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) {
      block.inverse_permutation[static_cast<std::size_t>(order[p])] = static_cast<Index>(p);
    }

    const Index in = static_cast<Index>(block.conditioner.size()) + spec.cond_dim;
    const Index out = static_cast<Index>(block.transformed.size());
    const MlpSpec net{{in, spec.hidden, out}, Activation::Tanh};
    const std::string name = prefix + ".block" + std::to_string(k);
    block.scale_net = Mlp::create(store, name + ".scale", net, rng, MlpInit::ZeroFinalLayer);
    block.shift_net = Mlp::create(store, name + ".shift", net, rng, MlpInit::ZeroFinalLayer);
    flow.blocks_.push_back(std::move(block));
  }
  return flow;
}

FlowResult CouplingFlow::apply_block(const FlowBlock& block, const Tensor& x, const Tensor& cond,
                                     FlowDirection dir) const {
  const Index n = x.rows();
  Tensor fixed = gather_cols(x, block.conditioner);
  Tensor moving = gather_cols(x, block.transformed);
  Tensor net_in = fixed;
  if (block.cond_width > 0) {
    if (!cond.defined() || cond.cols() != block.cond_width) {
      throw ShapeError("coupling block expects a conditioning input of width " + std::to_string(block.cond_width));
    }
    Tensor c = cond.rows() == n ? cond : repeat_rows(cond, n);
    net_in = concat({fixed, c}, Axis::Cols);
  }
  Tensor log_scale = clamp(block.scale_net.apply(net_in), -kMaxLogScale, kMaxLogScale);
  Tensor shift = block.shift_net.apply(net_in);
  Tensor moved;
  Tensor log_det;
  if (dir == FlowDirection::Forward) {
    moved = moving * exp(log_scale) + shift;
    log_det = sum(log_scale, Axis::Cols);
  } else {
    moved = (moving - shift) * exp(-log_scale);
    log_det = -sum(log_scale, Axis::Cols);
  }
  Tensor joined = concat({fixed, moved}, Axis::Cols);
  return {gather_cols(joined, block.inverse_permutation), log_det};
}

FlowResult CouplingFlow::apply(const Tensor& x, const Tensor& cond, FlowDirection direction) const {
  if (x.cols() != spec_.dim) {
    throw ShapeError("flow input width " + std::to_string(x.cols()) + " does not match " + std::to_string(spec_.dim));
  }
  Tensor y = x;
  Tensor log_det = Tensor::zeros(x.rows(), 1);
  const auto step = [&](const FlowBlock& b) {
    FlowResult r = apply_block(b, y, cond, direction);
    y = r.y;
    log_det = log_det + r.log_det;
  };
  if (direction == FlowDirection::Forward) {
    for (const auto& b : blocks_) step(b);
  } else {
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) step(*it);
  }
  if (!y.all_finite() || !log_det.all_finite()) throw NumericError("coupling flow produced a non-finite output");
  return {y, log_det};
}

}  // namespace dpf::ad
