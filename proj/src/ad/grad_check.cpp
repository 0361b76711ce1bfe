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

#include "dpf/ad/grad_check.hpp"

#include <cmath>

#include "dpf/error.hpp"

namespace dpf::ad {

namespace {

double evaluate(const std::function<Tensor(ParamStore&)>& f, ParamStore& point) {
  const Tensor out = f(point);
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericError("grad_check: function is not finite at a probe point");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor(ParamStore&)>& f, ParamStore& point, double h, double floor) {
  if (!(h > 0.0)) throw ConfigError("grad_check step must be positive");
  point.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor root = f(point);
    if (!std::isfinite(root.item())) throw NumericError("grad_check: function is not finite at the base point");
    backward(root);
  }
  GradCheckResult result;
  for (auto& slot : point.slots()) {
    const Matrix analytic = slot.param.grad();
    Matrix& value = slot.param.mutable_value();
    for (Index i = 0; i < value.size(); ++i) {
      const double original = value.data()[i];
      value.data()[i] = original + h;
      const double up = evaluate(f, point);
      value.data()[i] = original - h;
      const double down = evaluate(f, point);
      value.data()[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + floor);
      ++result.checked;
      if (err > result.max_rel_error || result.worst_parameter.empty()) {
        result.max_rel_error = std::max(err, result.max_rel_error);
        result.worst_parameter = slot.name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  point.zero_grad();
  return result;
}

}  // namespace dpf::ad
