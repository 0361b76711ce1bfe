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

#include "dpf/ad/param_store.hpp"

#include <cmath>

#include "dpf/error.hpp"

namespace dpf::ad {

Tensor ParamStore::add(const std::string& name, Matrix init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  Tensor t(std::move(init), true);
  t.zero_grad();
  index_.emplace(name, slots_.size());
  slots_.push_back({name, t, Matrix::Zero(t.rows(), t.cols()), Matrix::Zero(t.rows(), t.cols())});
  return t;
}

bool ParamStore::contains(std::string_view name) const { return index_.contains(std::string(name)); }

Tensor ParamStore::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return slots_[it->second].param;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) out.push_back(s.name);
  return out;
}

Index ParamStore::total_elements() const {
  Index n = 0;
  for (const auto& s : slots_) n += s.param.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& s : slots_) out.add(s.name, s.param.value());
  return out;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (auto& s : slots_) {
    const Tensor src = other.get(s.name);
    if (src.rows() != s.param.rows() || src.cols() != s.param.cols()) {
      throw ShapeError("parameter '" + s.name + "' shape differs between stores");
    }
    s.param.mutable_value() = src.value();
  }
}

void optimizer_step(ParamStore& store, const OptimizerSettings& settings) {
  if (!(settings.lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  for (const auto& s : store.slots()) {
    if (!s.param.has_grad()) throw NumericError("parameter '" + s.name + "' has no gradient");
    if (!s.param.grad().allFinite()) throw NumericError("non-finite gradient for parameter '" + s.name + "'");
  }
  store.set_step_count(store.step_count() + 1);
  const double step = static_cast<double>(store.step_count());
  for (auto& s : store.slots()) {
    Matrix& value = s.param.mutable_value();
    const Matrix& g = s.param.grad();
    if (settings.kind == OptimizerKind::Sgd) {
      value -= settings.lr * g;
    } else {
      s.first_moment = settings.beta1 * s.first_moment + (1.0 - settings.beta1) * g;
      s.second_moment = settings.beta2 * s.second_moment + (1.0 - settings.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(settings.beta1, step);
      const double c2 = 1.0 - std::pow(settings.beta2, step);
      value.array() -= settings.lr * (s.first_moment.array() / c1) /
                       ((s.second_moment.array() / c2).sqrt() + settings.eps);
    }
    s.param.zero_grad();
  }
}

}  // namespace dpf::ad
