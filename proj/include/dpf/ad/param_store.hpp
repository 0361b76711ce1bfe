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

#ifndef DPF_AD_PARAM_STORE_HPP_
#define DPF_AD_PARAM_STORE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpf/ad/tensor.hpp"

namespace dpf::ad {

/// Named learnable parameters with their optimiser moment buffers.
class ParamStore {
 public:
  struct Slot {
    std::string name;
    Tensor param;
    Matrix first_moment;
    Matrix second_moment;
  };

  /// Registers a new parameter with a zeroed gradient buffer. Names are unique.
  Tensor add(const std::string& name, Matrix init);

  bool contains(std::string_view name) const;
  Tensor get(std::string_view name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return slots_.size(); }
  Index total_elements() const;

  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t n) { step_count_ = n; }

  void zero_grad();
  /// Deep copy of values, with fresh leaves; gradient and moment buffers are zeroed.
  ParamStore clone() const;
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<Slot> slots_;
  std::unordered_map<std::string, std::size_t> index_;
  std::int64_t step_count_ = 0;
};

enum class OptimizerKind { Sgd, Adam };

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One gradient-descent update of every parameter, then zeroes the gradients.
/// Throws NumericError naming the first parameter with a missing or non-finite gradient.
void optimizer_step(ParamStore& store, const OptimizerSettings& settings);

}  // namespace dpf::ad

#endif  // DPF_AD_PARAM_STORE_HPP_
