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

#include "dpf/ad/checkpoint.hpp"

#include <fstream>
#include <set>

#include "dpf/binary_io.hpp"
#include "dpf/error.hpp"

namespace dpf::ad {

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

}  // namespace

void save_checkpoint(const ParamStore& store, const std::filesystem::path& stem, const nlohmann::json& metadata) {
  const auto blob_path = with_ext(stem, ".bin");
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["blob"] = blob_path.filename().string();
  manifest["metadata"] = metadata;
  manifest["params"] = nlohmann::json::array();
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("cannot write '" + blob_path.string() + "'");
  std::uint64_t offset = 0;
  for (const auto& slot : store.slots()) {
    const Matrix& v = slot.param.value();
    manifest["params"].push_back({{"name", slot.name}, {"shape", {v.rows(), v.cols()}}, {"offset", offset}});
    io::write_f64_le(blob, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    offset += static_cast<std::uint64_t>(v.size()) * 8;
  }
  manifest["total_bytes"] = offset;
  io::write_text(with_ext(stem, ".json"), manifest.dump(2) + "\n");
}

nlohmann::json load_checkpoint(ParamStore& store, const std::filesystem::path& stem) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text(with_ext(stem, ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  const int version = manifest.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw IoError("unsupported checkpoint format version " + std::to_string(version) + " (expected " +
                  std::to_string(kCheckpointFormatVersion) + ")");
  }
  const auto blob = io::read_f64_le(stem.parent_path() / manifest.at("blob").get<std::string>());
  std::set<std::string> seen;
  for (const auto& entry : manifest.at("params")) {
    const auto name = entry.at("name").get<std::string>();
    if (!seen.insert(name).second) throw IoError("checkpoint lists parameter '" + name + "' twice");
    if (!store.contains(name)) throw ShapeError("checkpoint parameter '" + name + "' is not part of this model");
    Tensor param = store.get(name);
    const auto rows = entry.at("shape").at(0).get<Index>();
    const auto cols = entry.at("shape").at(1).get<Index>();
    if (rows != param.rows() || cols != param.cols()) {
      throw ShapeError("checkpoint parameter '" + name + "' has shape " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " but the model expects " + std::to_string(param.rows()) + "x" +
                       std::to_string(param.cols()));
    }
    const auto offset = entry.at("offset").get<std::size_t>() / 8;
    if (offset + static_cast<std::size_t>(rows * cols) > blob.size()) {
      throw IoError("checkpoint blob too short for parameter '" + name + "'");
    }
    std::copy_n(blob.begin() + static_cast<std::ptrdiff_t>(offset), rows * cols, param.mutable_value().data());
  }
  for (const auto& name : store.names()) {
    if (!seen.contains(name)) throw ShapeError("checkpoint is missing parameter '" + name + "'");
  }
  return manifest.at("metadata");
}

}  // namespace dpf::ad
