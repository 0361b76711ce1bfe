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

#include "dpf/cli/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "dpf/ad/checkpoint.hpp"
#include "dpf/binary_io.hpp"
#include "dpf/cli/metrics.hpp"
#include "dpf/error.hpp"
#include "dpf/ssm/dataset.hpp"
#include "dpf/ssm/linear_gaussian.hpp"
#include "dpf/ssm/planar_world.hpp"
#include "dpf/ssm/simulate.hpp"

namespace dpf::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ssm::LinearGaussianParams<double> true_params(const ExperimentConfig& c) {
  ssm::LinearGaussianParams<double> p;
  p.theta1 = c.theta1;
  p.theta2 = c.theta2;
  return p;
}

Eigen::Index block_len(const ExperimentConfig& c) { return c.block_len > 0 ? c.block_len : c.steps / c.block_count; }

ssm::Dataset load_checked(const ExperimentConfig& c) {
  ssm::Dataset ds = ssm::load_dataset(c.dataset_dir());
  if (ds.model_id != c.model) {
    throw ConfigError("\"model\" is " + c.model + " but the dataset holds " + ds.model_id + " trajectories");
  }
  return ds;
}

std::string traj_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%04zu.csv", i);
  return buf;
}

/// Filters every trajectory, on `workers` threads, results in index order.
std::vector<filter::FilterOutput> filter_all(const ExperimentConfig& c, const components::FilterComponents& comps,
                                             const ssm::Dataset& ds) {
  const std::size_t n = ds.trajectories.size();
  std::vector<filter::FilterOutput> outs(n);
  const auto threads = static_cast<std::size_t>(std::min<std::int64_t>(c.workers, static_cast<std::int64_t>(n)));
  auto work = [&](std::size_t w, std::exception_ptr& err) {
    try {
      for (std::size_t i = w; i < n; i += threads) outs[i] = filter_trajectory(c, comps, ds.trajectories[i], i);
    } catch (...) {
      err = std::current_exception();
    }
  };
  std::vector<std::exception_ptr> errors(threads);
  if (threads <= 1) {
    work(0, errors[0]);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w, std::ref(errors[w]));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outs;
}

double total_rmse(const MetricsRecord& rec) {
  if (!rec.has_truth || rec.rows.empty()) return std::nan("");
  double s = 0.0;
  for (const auto& r : rec.rows) s += r.rmse * r.rmse;
  return std::sqrt(s / static_cast<double>(rec.rows.size()));
}

double sum_increments(const filter::FilterOutput& out) {
  double s = 0.0;
  for (double l : out.increment_values()) s += l;
  return s;
}

}  // namespace

std::uint64_t stream_seed(const ExperimentConfig& config, Stream stream) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

std::unique_ptr<ssm::StateSpaceModel> make_model(const ExperimentConfig& c) {
  if (c.model == "lgssm") return std::make_unique<ssm::LinearGaussianSsm>(true_params(c));
  ssm::PlanarWorld world;
  Rng rng(stream_seed(c, Stream::Map));
  world.map = ssm::make_smooth_map(c.world_size, c.world_size, 3.0, rng);
  world.patch_rows = world.patch_cols = c.patch_size;
  return std::make_unique<ssm::PlanarWorldSsm>(world);
}

ssm::PlanarWorld world_from_dataset(const ExperimentConfig& c, const ssm::Dataset& ds) {
  if (!ds.map) throw IoError("planar dataset has no map");
  ssm::PlanarWorld world;
  world.map = *ds.map;
  world.patch_rows = world.patch_cols = c.patch_size;
  if (world.patch_size() != ds.obs_dim) {
    throw ConfigError("\"patch_size\" does not match the dataset's observation width");
  }
  return world;
}

components::ComponentSpec component_spec(const ExperimentConfig& c, const ssm::Dataset& ds) {
  components::ComponentSpec s;
  s.model = c.model;
  s.dynamic = c.dynamic;
  s.proposal = c.proposal;
  s.measurement = c.measurement;
  s.state_dim = ds.state_dim;
  s.obs_dim = ds.obs_dim;
  s.init_theta1 = c.init_theta1;
  s.init_theta2 = c.init_theta2;
  s.flow_depth = static_cast<int>(c.flow_depth);
  s.flow_width = c.flow_width;
  s.hidden_width = c.hidden_width;
  s.feature_width = c.feature_width;
  s.identity_encoders = c.identity_encoders;
  s.sigma_obs = c.sigma_obs;
  s.decoder = c.ae_weight > 0.0;
  if (c.model == "planar") s.world = world_from_dataset(c, ds);
  s.seed = stream_seed(c, Stream::Components);
  return s;
}

filter::FilterConfig filter_config(const ExperimentConfig& c) {
  filter::FilterConfig f;
  f.num_particles = c.num_particles;
  f.resample.scheme = resampling::parse_scheme(c.resampler);
  f.resample.ess_min_frac = c.ess_min_frac;
  f.resample.soft_lambda = c.soft_lambda;
  f.resample.ot = {c.ot_epsilon, static_cast<int>(c.ot_max_iter), c.ot_tol};
  f.tbptt = c.tbptt == "every_step";
  return f;
}

filter::PfnetSettings pfnet_settings(const ExperimentConfig& c) {
  filter::PfnetSettings p;
  p.num_particles = c.num_particles;
  p.scheme = resampling::parse_scheme(c.resampler);
  p.soft_lambda = c.soft_lambda;
  p.ess_min_frac = c.ess_min_frac;
  p.tbptt = c.tbptt == "every_step";
  return p;
}

objectives::TrainSettings train_settings(const ExperimentConfig& c) {
  objectives::TrainSettings t;
  t.loss.kind = c.loss;
  const std::size_t dim = c.model == "planar" ? 3 : 1;
  if (c.gmm_sigma.size() == 1) {
    t.loss.gmm_sigma = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), c.gmm_sigma[0]);
  } else {
    t.loss.gmm_sigma = Eigen::Map<const Eigen::VectorXd>(c.gmm_sigma.data(), static_cast<Eigen::Index>(c.gmm_sigma.size()));
  }
  t.loss.blocks = {block_len(c), c.block_count};
  t.loss.lambda1 = c.lambda1;
  t.loss.lambda2 = c.lambda2;
  t.loss.heading_weight = c.heading_weight;
  t.loss.ae_weight = c.ae_weight;
  t.filter = filter_config(c);
  if (c.model == "planar") t.pfnet = pfnet_settings(c);
  t.optimizer.kind = c.optimizer == "sgd" ? ad::OptimizerKind::Sgd : ad::OptimizerKind::Adam;
  t.optimizer.lr = c.lr;
  t.lr_decay = c.lr_decay;
  t.epochs = static_cast<int>(c.epochs);
  t.minibatch = c.minibatch;
  t.seed = stream_seed(c, Stream::Training);
  t.out_dir = c.out_dir;
  t.metadata = {{"config", to_json(c)}, {"flow_depth", c.flow_depth}, {"flow_width", c.flow_width}};
  return t;
}

components::FilterComponents load_components(const ExperimentConfig& c, const ssm::Dataset& ds) {
  components::FilterComponents comps = components::build_components(component_spec(c, ds));
  if (!c.checkpoint.empty()) ad::load_checkpoint(comps.params, c.checkpoint);
  return comps;
}

filter::FilterOutput filter_trajectory(const ExperimentConfig& c, const components::FilterComponents& comps,
                                       const ssm::Trajectory& traj, std::size_t index) {
  Rng rng(derive_seed(stream_seed(c, Stream::Filter), index));
  if (c.model == "planar") return filter::pfnet_filter(traj, comps, pfnet_settings(c), rng);
  return filter::run_filter(traj, comps, filter_config(c), rng);
}

void run_generate(const ExperimentConfig& c) {
  const auto model = make_model(c);
  const ssm::Dataset ds = ssm::make_dataset(*model, c.num_trajectories, c.steps, c.seed, static_cast<int>(c.workers));
  ssm::save_dataset(ds, c.dataset_dir());
}

json run_train(const ExperimentConfig& c) {
  const ssm::Dataset ds = load_checked(c);
  components::FilterComponents comps = load_components(c, ds);
  const auto n = static_cast<std::int64_t>(ds.trajectories.size());
  std::int64_t n_val = c.validation_trajectories;
  if (n_val < 0) n_val = n >= 2 ? std::max<std::int64_t>(1, n / 10) : 0;
  if (n_val >= n) throw ConfigError("\"validation_trajectories\" leaves no training data");
  const std::span<const ssm::Trajectory> all(ds.trajectories);
  const auto train_set = all.first(static_cast<std::size_t>(n - n_val));
  const auto val_set = all.last(static_cast<std::size_t>(n_val));

  fs::create_directories(c.out_dir);
  const auto start = std::chrono::steady_clock::now();
  const objectives::TrainState state = objectives::train(comps, train_set, val_set, train_settings(c));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json summary = {{"command", "train"},           {"epochs", state.epoch},
                  {"best_epoch", state.best_epoch}, {"best_validation_loss", state.best_validation},
                  {"final_train_loss", state.running_loss}, {"seed", c.seed},
                  {"train_trajectories", train_set.size()}, {"validation_trajectories", val_set.size()},
                  {"wall_time_s", secs}};
  io::write_text(fs::path(c.out_dir) / "train_summary.json", summary.dump(2) + "\n");
  return summary;
}

json run_filter(const ExperimentConfig& c) {
  const ssm::Dataset ds = load_checked(c);
  const components::FilterComponents comps = load_components(c, ds);
  const auto start = std::chrono::steady_clock::now();
  const auto outs = filter_all(c, comps, ds);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir = fs::path(c.out_dir) / "metrics";
  fs::create_directories(dir);
  json runs = json::array();
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const MetricsRecord rec = make_metrics(outs[i], ds.trajectories[i].states);
    write_metrics(rec, dir / traj_name(i));
    runs.push_back({{"trajectory", i}, {"log_evidence", sum_increments(outs[i])}, {"rmse", total_rmse(rec)},
                    {"seed", derive_seed(stream_seed(c, Stream::Filter), i)}});
  }
  json summary = {{"command", "filter"}, {"runs", runs}, {"seed", c.seed}, {"wall_time_s", secs}};
  io::write_text(fs::path(c.out_dir) / "filter_summary.json", summary.dump(2) + "\n");
  return summary;
}

json run_evaluate(const ExperimentConfig& c) {
  const ssm::Dataset ds = load_checked(c);
  const components::FilterComponents comps = load_components(c, ds);
  const auto start = std::chrono::steady_clock::now();
  const auto outs = filter_all(c, comps, ds);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json runs = json::array();
  double sum_rmse = 0.0, sum_lt = 0.0, sum_rel = 0.0, sum_kalman_rmse = 0.0;
  const bool lgssm = c.model == "lgssm";
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const auto& traj = ds.trajectories[i];
    const MetricsRecord rec = make_metrics(outs[i], traj.states);
    const double lt = sum_increments(outs[i]);
    const double rmse = total_rmse(rec);
    json run = {{"trajectory", i}, {"log_evidence", lt}, {"rmse", rmse}};
    sum_lt += lt;
    sum_rmse += rmse;
    if (lgssm) {
      const auto kf = ssm::kalman_filter(true_params(c), traj);
      const ad::Matrix means = outs[i].mean_values();
      double se = 0.0;
      for (Eigen::Index t = 1; t < means.rows(); ++t) {
        const double d = means(t, 0) - kf.means[static_cast<std::size_t>(t)];
        se += d * d;
      }
      const double kalman_rmse = std::sqrt(se / static_cast<double>(means.rows() - 1));
      const double rel = std::abs(lt - kf.log_evidence) / std::abs(kf.log_evidence);
      run["kalman_log_evidence"] = kf.log_evidence;
      run["log_evidence_rel_error"] = rel;
      run["mean_rmse_vs_kalman"] = kalman_rmse;
      sum_rel += rel;
      sum_kalman_rmse += kalman_rmse;
    }
    runs.push_back(run);
  }
  const double n = static_cast<double>(outs.size());
  json summary = {{"command", "evaluate"},    {"model", c.model},        {"runs", runs},
                  {"mean_log_evidence", sum_lt / n}, {"mean_rmse", sum_rmse / n}, {"seed", c.seed},
                  {"wall_time_s", secs}};
  if (lgssm) {
    summary["mean_log_evidence_rel_error"] = sum_rel / n;
    summary["mean_rmse_vs_kalman"] = sum_kalman_rmse / n;
  }
  fs::create_directories(c.out_dir);
  io::write_text(fs::path(c.out_dir) / "evaluate_summary.json", summary.dump(2) + "\n");
  return summary;
}

void run_experiment(const ExperimentConfig& config, const std::string& command) {
  if (command == "generate") {
    run_generate(config);
  } else if (command == "train") {
    run_train(config);
  } else if (command == "filter") {
    run_filter(config);
  } else if (command == "evaluate") {
    run_evaluate(config);
  } else {
    throw ConfigError("unknown command \"" + command + "\"; valid: generate, train, filter, evaluate");
  }
}

}  // namespace dpf::cli
