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

#include "dpf/ssm/dataset.hpp"

#include <fstream>
#include <span>
#include <vector>

#include <json.hpp>

#include "dpf/binary_io.hpp"
#include "dpf/error.hpp"

namespace dpf::ssm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_blob(const fs::path& path, const std::vector<const Matrix*>& parts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const Matrix* m : parts) io::write_f64_le(out, std::span<const double>(m->data(), static_cast<std::size_t>(m->size())));
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix take(const std::vector<double>& blob, std::size_t& offset, Index rows, Index cols, const fs::path& path) {
  const auto n = static_cast<std::size_t>(rows * cols);
  if (offset + n > blob.size()) throw IoError("blob too short: " + path.string());
  Matrix m = Eigen::Map<const Matrix>(blob.data() + offset, rows, cols);
  offset += n;
  return m;
}

}  // namespace

void save_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["model_id"] = ds.model_id;
  manifest["state_dim"] = ds.state_dim;
  manifest["obs_dim"] = ds.obs_dim;
  manifest["action_dim"] = ds.action_dim;
  manifest["steps"] = ds.steps;
  manifest["count"] = ds.trajectories.size();
  manifest["seed"] = ds.seed;
  json seeds = json::array();
  std::vector<const Matrix*> states, observations, actions;
  for (const auto& tr : ds.trajectories) {
    if (tr.states.rows() != ds.steps + 1 || tr.observations.rows() != ds.steps) {
      throw ShapeError("save_dataset: trajectory length differs from dataset steps");
    }
    seeds.push_back(tr.seed);
    states.push_back(&tr.states);
    observations.push_back(&tr.observations);
    actions.push_back(&tr.actions);
  }
  manifest["trajectory_seeds"] = seeds;
  manifest["blobs"] = {{"states", "states.bin"}, {"observations", "observations.bin"}, {"actions", "actions.bin"}};
  if (ds.map) {
    manifest["blobs"]["map"] = "map.bin";
    manifest["map_shape"] = {ds.map->rows(), ds.map->cols()};
    write_blob(dir / "map.bin", {&*ds.map});
  }
  write_blob(dir / "states.bin", states);
  write_blob(dir / "observations.bin", observations);
  write_blob(dir / "actions.bin", actions);
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(io::read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("malformed dataset manifest in " + dir.string() + ": " + e.what());
  }
  try {
    if (manifest.at("format_version").get<int>() != kDatasetFormatVersion) {
      throw IoError("unsupported dataset format version in " + dir.string());
    }
    Dataset ds;
    ds.model_id = manifest.at("model_id").get<std::string>();
    ds.state_dim = manifest.at("state_dim").get<Index>();
    ds.obs_dim = manifest.at("obs_dim").get<Index>();
    ds.action_dim = manifest.at("action_dim").get<Index>();
    ds.steps = manifest.at("steps").get<Index>();
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    const auto count = manifest.at("count").get<std::size_t>();
    const auto seeds = manifest.at("trajectory_seeds").get<std::vector<std::uint64_t>>();
    if (seeds.size() != count) throw IoError("trajectory_seeds length differs from count");

    const auto states = io::read_f64_le(dir / "states.bin");
    const auto observations = io::read_f64_le(dir / "observations.bin");
    const auto actions = io::read_f64_le(dir / "actions.bin");
    std::size_t os = 0, oo = 0, oa = 0;
    const Index action_rows = ds.action_dim > 0 ? ds.steps : 0;
    for (std::size_t i = 0; i < count; ++i) {
      Trajectory tr;
      tr.seed = seeds[i];
      tr.states = take(states, os, ds.steps + 1, ds.state_dim, dir / "states.bin");
      tr.observations = take(observations, oo, ds.steps, ds.obs_dim, dir / "observations.bin");
      tr.actions = take(actions, oa, action_rows, ds.action_dim, dir / "actions.bin");
      ds.trajectories.push_back(std::move(tr));
    }
    if (os != states.size() || oo != observations.size() || oa != actions.size()) {
      throw IoError("dataset blobs in " + dir.string() + " are longer than the manifest declares");
    }
    if (manifest.contains("map_shape")) {
      const auto shape = manifest.at("map_shape").get<std::vector<Index>>();
      const auto blob = io::read_f64_le(dir / "map.bin");
      std::size_t off = 0;
      ds.map = take(blob, off, shape.at(0), shape.at(1), dir / "map.bin");
    }
    return ds;
  } catch (const json::exception& e) {
    throw IoError("malformed dataset manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace dpf::ssm
