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

#ifndef DPF_AD_CHECKPOINT_HPP_
#define DPF_AD_CHECKPOINT_HPP_

#include <filesystem>

#include <json.hpp>

#include "dpf/ad/param_store.hpp"

namespace dpf::ad {

inline constexpr int kCheckpointFormatVersion = 1;

/// Writes `<stem>.json` (manifest: version, parameter names, shapes, byte
/// offsets, metadata) and `<stem>.bin` (little-endian float64 values).
void save_checkpoint(const ParamStore& store, const std::filesystem::path& stem,
                     const nlohmann::json& metadata = nlohmann::json::object());

/// Loads values into the already-registered parameters of `store`. Every store
/// parameter must be present with a matching shape.
nlohmann::json load_checkpoint(ParamStore& store, const std::filesystem::path& stem);

}  // namespace dpf::ad

#endif  // DPF_AD_CHECKPOINT_HPP_
