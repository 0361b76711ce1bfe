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

#include "dpf/cli/config.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "dpf/binary_io.hpp"
#include "dpf/error.hpp"

namespace dpf::cli {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

void require_one_of(const std::string& key, const std::string& value, const std::vector<std::string>& valid) {
  if (std::find(valid.begin(), valid.end(), value) == valid.end()) {
    throw ConfigError("\"" + key + "\": unknown value \"" + value + "\"; valid: " + join(valid));
  }
}

template <typename T>
T read(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("\"" + key + "\": wrong type");
  }
}

std::int64_t read_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("\"" + key + "\": expected an integer");
  return j.get<std::int64_t>();
}

double read_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("\"" + key + "\": expected a number");
  return j.get<double>();
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("\"" + key + "\": " + what);
}

}  // namespace

std::filesystem::path ExperimentConfig::dataset_dir() const {
  return dataset.empty() ? std::filesystem::path(out_dir) / "dataset" : std::filesystem::path(dataset);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig c;
  std::map<std::string, std::function<void(const json&)>> fields;
  auto str = [&](const char* k, std::string& dst) { fields[k] = [&dst, k](const json& v) { dst = read<std::string>(v, k); }; };
  auto integer = [&](const char* k, std::int64_t& dst) { fields[k] = [&dst, k](const json& v) { dst = read_int(v, k); }; };
  auto real = [&](const char* k, double& dst) { fields[k] = [&dst, k](const json& v) { dst = read_real(v, k); }; };

  str("model", c.model);
  str("dynamic", c.dynamic);
  str("proposal", c.proposal);
  str("measurement", c.measurement);
  integer("num_particles", c.num_particles);
  integer("steps", c.steps);
  integer("num_trajectories", c.num_trajectories);
  integer("validation_trajectories", c.validation_trajectories);
  str("resampler", c.resampler);
  real("soft_lambda", c.soft_lambda);
  real("ot_epsilon", c.ot_epsilon);
  integer("ot_max_iter", c.ot_max_iter);
  real("ot_tol", c.ot_tol);
  real("ess_min_frac", c.ess_min_frac);
  str("tbptt", c.tbptt);
  str("loss", c.loss);
  fields["gmm_sigma"] = [&c](const json& v) {
    if (v.is_number()) {
      c.gmm_sigma = {v.get<double>()};
    } else if (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      c.gmm_sigma = v.get<std::vector<double>>();
    } else {
      throw ConfigError("\"gmm_sigma\": expected a number or a non-empty array of numbers");
    }
  };
  integer("block_len", c.block_len);
  integer("block_count", c.block_count);
  real("lambda1", c.lambda1);
  real("lambda2", c.lambda2);
  real("heading_weight", c.heading_weight);
  real("ae_weight", c.ae_weight);
  str("optimizer", c.optimizer);
  real("lr", c.lr);
  real("lr_decay", c.lr_decay);
  integer("epochs", c.epochs);
  integer("minibatch", c.minibatch);
  fields["seed"] = [&c](const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("\"seed\": expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  };
  str("out_dir", c.out_dir);
  str("dataset", c.dataset);
  str("checkpoint", c.checkpoint);
  integer("flow_depth", c.flow_depth);
  integer("flow_width", c.flow_width);
  integer("hidden_width", c.hidden_width);
  integer("feature_width", c.feature_width);
  fields["identity_encoders"] = [&c](const json& v) { c.identity_encoders = read<bool>(v, "identity_encoders"); };
  real("sigma_obs", c.sigma_obs);
  real("theta1", c.theta1);
  real("theta2", c.theta2);
  bool init1_set = false, init2_set = false;
  fields["init_theta1"] = [&](const json& v) { c.init_theta1 = read_real(v, "init_theta1"); init1_set = true; };
  fields["init_theta2"] = [&](const json& v) { c.init_theta2 = read_real(v, "init_theta2"); init2_set = true; };
  integer("world_size", c.world_size);
  integer("patch_size", c.patch_size);
  integer("workers", c.workers);

  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown configuration key \"" + key + "\"");
    it->second(value);
  }

  if (!j.contains("model")) throw ConfigError("\"model\" is required");
  require_one_of("model", c.model, {"lgssm", "planar"});
  const bool planar = c.model == "planar";
  if (c.dynamic.empty()) c.dynamic = planar ? "robot_motion" : "gaussian_const";
  if (c.measurement.empty()) c.measurement = planar ? "nn_scalar" : "analytic_gaussian";
  if (c.resampler.empty()) c.resampler = planar ? "soft" : "multinomial";
  if (!init1_set) c.init_theta1 = c.theta1;
  if (!init2_set) c.init_theta2 = c.theta2;

  require_one_of("dynamic", c.dynamic, {"gaussian_const", "gaussian_hetero", "flow_dynamic", "robot_motion"});
  require_one_of("proposal", c.proposal, {"bootstrap", "cnf_proposal"});
  require_one_of("measurement", c.measurement,
                 {"analytic_gaussian", "nn_scalar", "feature_cosine", "feature_gaussian", "cnf_measurement"});
  require_one_of("resampler", c.resampler, {"none", "multinomial", "weight_preserving", "soft", "ot"});
  require_one_of("tbptt", c.tbptt, {"none", "every_step"});
  require_one_of("loss", c.loss, {"rmse", "gmm_ll", "elbo", "pseudo_lik", "combined", "pose"});
  require_one_of("optimizer", c.optimizer, {"adam", "sgd"});

  check(c.num_particles >= 1, "num_particles", "must be at least 1");
  check(c.steps >= 1, "steps", "must be at least 1");
  check(c.num_trajectories >= 1, "num_trajectories", "must be at least 1");
  check(c.validation_trajectories >= -1 && c.validation_trajectories < c.num_trajectories, "validation_trajectories",
        "must be -1 or in [0, num_trajectories)");
  check(c.soft_lambda > 0.0 && c.soft_lambda <= 1.0, "soft_lambda", "must lie in (0, 1]");
  check(c.ot_epsilon > 0.0, "ot_epsilon", "must be positive");
  check(c.ot_max_iter >= 1, "ot_max_iter", "must be at least 1");
  check(c.ot_tol > 0.0, "ot_tol", "must be positive");
  check(c.ess_min_frac >= 0.0 && c.ess_min_frac <= 1.0, "ess_min_frac", "must lie in [0, 1]");
  check(std::all_of(c.gmm_sigma.begin(), c.gmm_sigma.end(), [](double s) { return s > 0.0; }), "gmm_sigma",
        "entries must be positive");
  check(c.block_count >= 1, "block_count", "must be at least 1");
  check(c.block_len >= 0, "block_len", "must be non-negative");
  const std::int64_t block_len = c.block_len > 0 ? c.block_len : c.steps / c.block_count;
  check(block_len >= 1 && block_len * c.block_count <= c.steps, "block_len",
        "block_len * block_count must be between 1 and steps");
  check(c.lambda1 >= 0.0, "lambda1", "must be non-negative");
  check(c.lambda2 >= 0.0, "lambda2", "must be non-negative");
  check(c.heading_weight >= 0.0, "heading_weight", "must be non-negative");
  check(c.ae_weight >= 0.0, "ae_weight", "must be non-negative");
  check(c.lr >= 0.0, "lr", "must be non-negative");
  check(c.lr_decay > 0.0, "lr_decay", "must be positive");
  check(c.epochs >= 0, "epochs", "must be non-negative");
  check(c.minibatch >= 1, "minibatch", "must be at least 1");
  check(!c.out_dir.empty(), "out_dir", "must not be empty");
  check(c.flow_depth >= 1, "flow_depth", "must be at least 1");
  check(c.flow_width >= 1, "flow_width", "must be at least 1");
  check(c.hidden_width >= 1, "hidden_width", "must be at least 1");
  check(c.feature_width >= 1, "feature_width", "must be at least 1");
  check(c.sigma_obs > 0.0, "sigma_obs", "must be positive");
  check(c.world_size >= 4, "world_size", "must be at least 4");
  check(c.patch_size >= 1 && c.patch_size <= c.world_size, "patch_size", "must be in [1, world_size]");
  check(c.workers >= 1, "workers", "must be at least 1");

  // Pairings.
  if (planar && c.dynamic != "robot_motion") throw ConfigError("\"dynamic\": the planar model uses robot_motion");
  if (!planar && c.dynamic == "robot_motion") throw ConfigError("\"dynamic\": robot_motion needs the planar model");
  if (planar && c.proposal != "bootstrap") throw ConfigError("\"proposal\": robot_motion needs a bootstrap proposal");
  const bool likelihood_loss = c.loss == "elbo" || c.loss == "pseudo_lik" || c.loss == "combined";
  if (c.measurement == "nn_scalar" && likelihood_loss) {
    throw ConfigError("\"loss\": nn_scalar gives unnormalised scores and cannot be trained with \"" + c.loss + "\"");
  }
  if (c.measurement == "feature_cosine" && c.proposal != "bootstrap") {
    throw ConfigError("\"proposal\": feature_cosine scores are only used with the bootstrap proposal");
  }
  if (c.loss == "pose" && !planar) throw ConfigError("\"loss\": pose needs the planar model");
  if (c.ae_weight > 0.0 && (c.measurement == "analytic_gaussian" || c.measurement == "cnf_measurement")) {
    throw ConfigError("\"ae_weight\": " + c.measurement + " has no observation encoder to decode from");
  }
  const std::size_t state_dim = planar ? 3 : 1;
  check(c.gmm_sigma.size() == 1 || c.gmm_sigma.size() == state_dim, "gmm_sigma",
        "needs one entry or one per state dimension");
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read configuration: ") + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("malformed configuration " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["dynamic"] = c.dynamic;
  j["proposal"] = c.proposal;
  j["measurement"] = c.measurement;
  j["num_particles"] = c.num_particles;
  j["steps"] = c.steps;
  j["num_trajectories"] = c.num_trajectories;
  j["validation_trajectories"] = c.validation_trajectories;
  j["resampler"] = c.resampler;
  j["soft_lambda"] = c.soft_lambda;
  j["ot_epsilon"] = c.ot_epsilon;
  j["ot_max_iter"] = c.ot_max_iter;
  j["ot_tol"] = c.ot_tol;
  j["ess_min_frac"] = c.ess_min_frac;
  j["tbptt"] = c.tbptt;
  j["loss"] = c.loss;
  j["gmm_sigma"] = c.gmm_sigma;
  j["block_len"] = c.block_len;
  j["block_count"] = c.block_count;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["heading_weight"] = c.heading_weight;
  j["ae_weight"] = c.ae_weight;
  j["optimizer"] = c.optimizer;
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["epochs"] = c.epochs;
  j["minibatch"] = c.minibatch;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["dataset"] = c.dataset;
  j["checkpoint"] = c.checkpoint;
  j["flow_depth"] = c.flow_depth;
  j["flow_width"] = c.flow_width;
  j["hidden_width"] = c.hidden_width;
  j["feature_width"] = c.feature_width;
  j["identity_encoders"] = c.identity_encoders;
  j["sigma_obs"] = c.sigma_obs;
  j["theta1"] = c.theta1;
  j["theta2"] = c.theta2;
  j["init_theta1"] = c.init_theta1;
  j["init_theta2"] = c.init_theta2;
  j["world_size"] = c.world_size;
  j["patch_size"] = c.patch_size;
  j["workers"] = c.workers;
  return j;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

}  // namespace dpf::cli
