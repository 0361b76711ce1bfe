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

#ifndef DPF_AD_NN_HPP_
#define DPF_AD_NN_HPP_

#include <string>
#include <vector>

#include "dpf/ad/ops.hpp"
#include "dpf/ad/param_store.hpp"
#include "dpf/random.hpp"

namespace dpf::ad {

enum class Activation { Tanh, Relu };

struct MlpSpec {
  std::vector<Index> widths;  // input, hidden..., output
  Activation activation = Activation::Tanh;
};

enum class MlpInit {
  Random,          // scaled normal weights, zero biases
  ZeroFinalLayer,  // as Random, but the output layer starts at zero
  Zero,
};

/// Fully connected network: affine-activation chain with a linear output layer.
/// Rows of the input are independent samples.
class Mlp {
 public:
  Mlp() = default;

  /// Registers `prefix.w{k}` / `prefix.b{k}` in `store`.
  static Mlp create(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng,
                    MlpInit init = MlpInit::Random);

  Tensor apply(const Tensor& input) const;

  const MlpSpec& spec() const { return spec_; }
  Index input_width() const { return spec_.widths.front(); }
  Index output_width() const { return spec_.widths.back(); }
  const std::vector<Tensor>& weights() const { return weights_; }
  const std::vector<Tensor>& biases() const { return biases_; }

 private:
  MlpSpec spec_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// Free-function form of Mlp::apply for a network registered under `prefix`.
Tensor mlp_apply(const ParamStore& store, const std::string& prefix, const Tensor& input, const MlpSpec& spec);

/// mean + exp(log_std) * noise. The noise is drawn outside the tape by the caller.
Tensor reparam_gaussian(const Tensor& mean, const Tensor& log_std, const Tensor& noise);

/// Pathwise estimate of d/d(mean, log_std) E[psi(x)], x ~ N(mean, exp(log_std)^2),
/// averaging K reparameterised samples. Returns {d/dmean, d/dlog_std}.
struct PathwiseGradient {
  Matrix d_mean;
  Matrix d_log_std;
};
PathwiseGradient pathwise_gradient(const std::function<Tensor(const Tensor&)>& psi, const Matrix& mean,
                                   const Matrix& log_std, int samples, Rng& rng);

}  // namespace dpf::ad

#endif  // DPF_AD_NN_HPP_
