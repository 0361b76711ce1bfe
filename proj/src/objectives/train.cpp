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

#include "dpf/objectives/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dpf/ad/checkpoint.hpp"
#include "dpf/binary_io.hpp"
#include "dpf/error.hpp"

namespace dpf::objectives {
namespace {

constexpr std::uint64_t kEvalStream = 0x6576616cULL;

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

Tensor supervised_term(const filter::FilterOutput& out, const ssm::Trajectory& traj, const LossSettings& loss,
                       bool planar) {
  if (planar) return pose_loss(out.means, traj.states, loss.heading_weight);
  return rmse_loss(out.means, traj.states);
}

Tensor add_ae(const Tensor& loss, const filter::FilterComponents& comps, const ssm::Trajectory& traj,
              const LossSettings& settings) {
  if (settings.ae_weight <= 0.0) return loss;
  return loss + settings.ae_weight * comps.measurement->ae_loss(Tensor(traj.observations));
}

void write_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& curve) {
  std::string text = "epoch,lr,train_loss,validation_loss\n";
  for (const auto& r : curve) {
    text += std::to_string(r.epoch) + "," + fmt(r.lr) + "," + fmt(r.train_loss) + "," + fmt(r.validation_loss) + "\n";
  }
  io::write_text(path, text);
}

std::vector<Matrix> snapshot(const ad::ParamStore& store) {
  std::vector<Matrix> out;
  for (const auto& slot : store.slots()) out.push_back(slot.param.value());
  return out;
}

}  // namespace

bool is_likelihood_loss(const std::string& kind) {
  return kind == "elbo" || kind == "pseudo_lik" || kind == "combined";
}

void validate_loss(const LossSettings& loss, const filter::FilterComponents& comps) {
  static const std::vector<std::string> kinds = {"rmse", "gmm_ll", "elbo", "pseudo_lik", "combined", "pose"};
  if (std::find(kinds.begin(), kinds.end(), loss.kind) == kinds.end()) {
    throw ConfigError("unknown loss \"" + loss.kind + "\"; valid: rmse, gmm_ll, elbo, pseudo_lik, combined, pose");
  }
  if (is_likelihood_loss(loss.kind) && comps.measurement->name() == "nn_scalar") {
    throw ConfigError("nn_scalar gives unnormalised scores and cannot be trained with loss \"" + loss.kind + "\"");
  }
  if (loss.ae_weight > 0.0 && !comps.measurement->has_decoder()) {
    throw ConfigError("ae_weight > 0 needs a measurement model with a decoder");
  }
  if (loss.lambda1 < 0.0 || loss.lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be non-negative");
}

filter::FilterConfig filter_config_for(const TrainSettings& settings, const ssm::Trajectory& traj) {
  if (!settings.pfnet) return settings.filter;
  filter::FilterConfig config = filter::pfnet_config(*settings.pfnet, traj);
  return config;
}

Tensor trajectory_loss(const filter::FilterComponents& comps, const ssm::Trajectory& traj,
                       const TrainSettings& settings, Rng& rng) {
  const LossSettings& loss = settings.loss;
  filter::FilterConfig config = filter_config_for(settings, traj);
  const bool planar = settings.pfnet.has_value();

  if (loss.kind == "pseudo_lik") {
    return add_ae(pseudo_likelihood_loss(traj.observations, traj.actions, loss.blocks, comps, config, rng), comps,
                  traj, loss);
  }
  if (loss.kind == "gmm_ll") config.retain_ensembles = true;
  const filter::FilterOutput out = filter::run_filter(traj, comps, config, rng);
  Tensor value;
  if (loss.kind == "elbo") {
    value = elbo_loss(out);
  } else if (loss.kind == "rmse") {
    value = rmse_loss(out.means, traj.states);
  } else if (loss.kind == "pose") {
    value = pose_loss(out.means, traj.states, loss.heading_weight);
  } else if (loss.kind == "gmm_ll") {
    const Eigen::VectorXd sigma =
        loss.gmm_sigma.size() > 0 ? loss.gmm_sigma : Eigen::VectorXd::Ones(traj.states.cols());
    value = gmm_loglik_loss(out.ensembles, traj.states, sigma);
  } else if (loss.kind == "combined") {
    const Tensor pseudo = pseudo_likelihood_loss(traj.observations, traj.actions, loss.blocks, comps, config, rng);
    value = combined_objective(supervised_term(out, traj, loss, planar), pseudo, loss.lambda1, loss.lambda2,
                               loss.blocks.count, loss.supervised);
  } else {
    throw ConfigError("unknown loss \"" + loss.kind + "\"");
  }
  return add_ae(value, comps, traj, loss);
}

double evaluate_loss(const filter::FilterComponents& comps, std::span<const ssm::Trajectory> trajs,
                     const TrainSettings& settings, std::uint64_t seed) {
  if (trajs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    total += trajectory_loss(comps, trajs[i], settings, rng).item();
  }
  return total / static_cast<double>(trajs.size());
}

TrainState train(filter::FilterComponents& comps, std::span<const ssm::Trajectory> train_set,
                 std::span<const ssm::Trajectory> validation_set, const TrainSettings& settings) {
  validate_loss(settings.loss, comps);
  if (settings.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (settings.minibatch < 1) throw ConfigError("minibatch must be at least 1");
  if (!(settings.lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
  if (train_set.empty() && settings.epochs > 0) throw ConfigError("training needs at least one trajectory");

  const bool write = !settings.out_dir.empty();
  if (write) std::filesystem::create_directories(settings.out_dir);
  const auto held_out = validation_set.empty() ? train_set : validation_set;
  const std::uint64_t eval_seed = derive_seed(settings.seed, kEvalStream);

  TrainState state;
  state.seed = settings.seed;
  auto checkpoint_meta = [&](int epoch) {
    nlohmann::json meta = settings.metadata;
    meta["epoch"] = epoch;
    meta["seed"] = settings.seed;
    return meta;
  };

  state.best_validation = evaluate_loss(comps, held_out, settings, eval_seed);
  state.best_epoch = 0;
  state.best_values = snapshot(comps.params);
  state.curve.push_back({0, settings.optimizer.lr, std::numeric_limits<double>::quiet_NaN(), state.best_validation});
  if (write) ad::save_checkpoint(comps.params, settings.out_dir / "best", checkpoint_meta(0));

  ad::OptimizerSettings opt = settings.optimizer;
  std::vector<std::size_t> order(train_set.size());
  const auto batch = static_cast<std::size_t>(settings.minibatch);
  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_engine(derive_seed(settings.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_engine);
    const std::uint64_t epoch_seed = derive_seed(settings.seed, 0x100000000ULL + static_cast<std::uint64_t>(epoch));

    double loss_sum = 0.0;
    int loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      // pseudo_lik takes one optimiser step per block visit; every other loss one per minibatch.
      const bool per_block = settings.loss.kind == "pseudo_lik";
      const Index visits = per_block ? settings.loss.blocks.count : 1;
      for (Index b = 0; b < visits; ++b) {
        ad::Tape tape;
        ad::TapeScope scope(tape);
        Tensor total;
        for (std::size_t k = start; k < stop; ++k) {
          const auto& traj = train_set[order[k]];
          Rng rng(derive_seed(epoch_seed, order[k] * static_cast<std::uint64_t>(visits) + static_cast<std::uint64_t>(b)));
          Tensor l;
          if (per_block) {
            l = block_elbo_loss(traj.observations, traj.actions, b, settings.loss.blocks, comps,
                                filter_config_for(settings, traj), rng);
            if (settings.loss.ae_weight > 0.0) {
              l = l + settings.loss.ae_weight * comps.measurement->ae_loss(Tensor(traj.observations));
            }
          } else {
            l = trajectory_loss(comps, traj, settings, rng);
          }
          total = total.defined() ? total + l : l;
        }
        total = total * scale;
        const double value = total.item();
        if (!std::isfinite(value)) {
          if (write) write_curve(settings.out_dir / "training_curve.csv", state.curve);
          throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
        }
        ad::backward(total);
        ad::optimizer_step(comps.params, opt);
        loss_sum += value;
        ++loss_count;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = opt.lr;
    rec.train_loss = loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    rec.validation_loss = evaluate_loss(comps, held_out, settings, eval_seed);
    state.curve.push_back(rec);
    state.epoch = epoch;
    state.running_loss = rec.train_loss;
    if (rec.validation_loss < state.best_validation) {
      state.best_validation = rec.validation_loss;
      state.best_epoch = epoch;
      state.best_values = snapshot(comps.params);
      if (write) ad::save_checkpoint(comps.params, settings.out_dir / "best", checkpoint_meta(epoch));
    }
    opt.lr *= settings.lr_decay;
  }

  if (write) {
    ad::save_checkpoint(comps.params, settings.out_dir / "final", checkpoint_meta(state.epoch));
    write_curve(settings.out_dir / "training_curve.csv", state.curve);
  }
  return state;
}

}  // namespace dpf::objectives
