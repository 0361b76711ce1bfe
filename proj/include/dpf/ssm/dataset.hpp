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

#ifndef DPF_SSM_DATASET_HPP_
#define DPF_SSM_DATASET_HPP_

#include <filesystem>

#include "dpf/ssm/model.hpp"

namespace dpf::ssm {

inline constexpr int kDatasetFormatVersion = 1;

/// Writes `dir/manifest.json` plus little-endian f64 blobs states.bin,
/// observations.bin, actions.bin (and map.bin when the dataset carries a map).
/// Blobs concatenate trajectories in index order, each row-major.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace dpf::ssm

#endif  // DPF_SSM_DATASET_HPP_
