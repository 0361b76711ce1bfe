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

#ifndef DPF_AD_GRAD_CHECK_HPP_
#define DPF_AD_GRAD_CHECK_HPP_

#include <functional>
#include <string>

#include "dpf/ad/param_store.hpp"

namespace dpf::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Index worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  Index checked = 0;
};

/// Compares tape gradients of the scalar `f` with central differences at every
/// element of every parameter in `point`:
///   |analytic - numeric| / (|analytic| + |numeric| + floor).
/// `f` must be deterministic (re-seed inside it). Parameter values are restored.
GradCheckResult grad_check(const std::function<Tensor(ParamStore&)>& f, ParamStore& point, double h,
                           double floor = 1e-8);

}  // namespace dpf::ad

#endif  // DPF_AD_GRAD_CHECK_HPP_
