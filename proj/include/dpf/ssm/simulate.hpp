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

#ifndef DPF_SSM_SIMULATE_HPP_
#define DPF_SSM_SIMULATE_HPP_

#include <cstdint>

#include "dpf/ssm/model.hpp"

namespace dpf::ssm {

/// Ancestral sample x_0, (a_1, x_1, y_1), ..., (a_T, x_T, y_T) from one seeded stream.
Trajectory simulate(const StateSpaceModel& model, Index steps, std::uint64_t seed);

/// `count` independent trajectories; trajectory i uses derive_seed(seed, i).
/// `workers` > 1 generates trajectories on that many threads; output is identical.
Dataset make_dataset(const StateSpaceModel& model, Index count, Index steps, std::uint64_t seed, int workers = 1);

}  // namespace dpf::ssm

#endif  // DPF_SSM_SIMULATE_HPP_
