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

#include "dpf/ad/nn.hpp"

#include <algorithm>
#include <cmath>

#include "dpf/error.hpp"

namespace dpf::ad {

Mlp Mlp::create(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng, MlpInit init) {
  if (spec.widths.size() < 2) throw ConfigError("MLP '" + prefix + "' needs at least input and output widths");
  Mlp mlp;
  mlp.spec_ = spec;
  const std::size_t layers = spec.widths.size() - 1;
  for (std::size_t k = 0; k < layers; ++k) {
    const Index in = spec.widths[k];
    const Index out = spec.widths[k + 1];
    const bool zero = init == MlpInit::Zero || (init == MlpInit::ZeroFinalLayer && k + 1 == layers);
    Matrix w = Matrix::Zero(in, out);
    if (!zero) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(in, 1)));
      w = rng.normal_matrix(in, out) * scale;
    }
    mlp.weights_.push_back(store.add(prefix + ".w" + std::to_string(k), std::move(w)));
    mlp.biases_.push_back(store.add(prefix + ".b" + std::to_string(k), Matrix::Zero(1, out)));
  }
  return mlp;
}

Tensor Mlp::apply(const Tensor& input) const {
  if (input.cols() != input_width()) {
    throw ShapeError("MLP input width " + std::to_string(input.cols()) + " does not match expected " +
                     std::to_string(input_width()));
  }
  Tensor h = input;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    h = matmul(h, weights_[k]) + biases_[k];
    if (k + 1 < weights_.size()) h = spec_.activation == Activation::Tanh ? tanh(h) : relu(h);
  }
  return h;
}

Tensor mlp_apply(const ParamStore& store, const std::string& prefix, const Tensor& input, const MlpSpec& spec) {
  if (spec.widths.empty() || input.cols() != spec.widths.front()) {
    throw ShapeError("MLP '" + prefix + "' input width mismatch");
  }
  Tensor h = input;
  const std::size_t layers = spec.widths.size() - 1;
  for (std::size_t k = 0; k < layers; ++k) {
    h = matmul(h, store.get(prefix + ".w" + std::to_string(k))) + store.get(prefix + ".b" + std::to_string(k));
    if (k + 1 < layers) h = spec.activation == Activation::Tanh ? tanh(h) : relu(h);
  }
  return h;
}

Tensor reparam_gaussian(const Tensor& mean, const Tensor& log_std, const Tensor& noise) {
  return mean + exp(log_std) * noise;
}

PathwiseGradient pathwise_gradient(const std::function<Tensor(const Tensor&)>& psi, const Matrix& mean,
                                   const Matrix& log_std, int samples, Rng& rng) {
  if (samples < 1) throw ConfigError("pathwise_gradient needs at least one sample");
  Tensor m(mean, true);
  Tensor s(log_std, true);
  m.zero_grad();
  s.zero_grad();
  for (int k = 0; k < samples; ++k) {
    Tape tape;
    TapeScope scope(tape);
    Tensor noise(rng.normal_matrix(mean.rows(), mean.cols()));
    backward(sum(psi(reparam_gaussian(m, s, noise))));
  }
  return {m.grad() / samples, s.grad() / samples};
}

}  // namespace dpf::ad
