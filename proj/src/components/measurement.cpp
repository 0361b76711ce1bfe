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

#include "dpf/components/measurement.hpp"

#include <cmath>
#include <numbers>

#include "dpf/error.hpp"

namespace dpf::components {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);
constexpr double kCosineFloor = 1e-6;
constexpr double kScoreFloor = 1e-8;

Tensor standard_normal_log_density(const Tensor& z) {
  return ad::sum(-0.5 * ad::square(z) - 0.5 * kLog2Pi, ad::Axis::Cols);
}

/// Identity or MLP feature map.
class Encoder {
 public:
  Encoder() = default;
  Encoder(ad::ParamStore& store, const std::string& prefix, Index in, Index out, Index hidden, bool identity,
          Rng& rng)
      : identity_(identity) {
    if (identity) {
      if (in != out) throw ConfigError(prefix + ": identity encoder needs equal input and feature widths");
      return;
    }
    net_ = ad::Mlp::create(store, prefix, {{in, hidden, out}, ad::Activation::Tanh}, rng);
  }
  Tensor operator()(const Tensor& x) const { return identity_ ? x : net_.apply(x); }

 private:
  bool identity_ = true;
  ad::Mlp net_;
};

class Base : public MeasurementModel {
 public:
  Base(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng, bool uses_encoder)
      : spec_(spec) {
    features_ = spec.state_features ? spec.state_features : [](const Tensor& x) { return x; };
    feature_dim_ = spec.state_feature_dim > 0 ? spec.state_feature_dim : spec.state_dim;
    if (uses_encoder) {
      const Index de = spec.identity_encoders ? spec.obs_dim : spec.feature_width;
      obs_encoder_ = Encoder(store, prefix + ".obs_encoder", spec.obs_dim, de, spec.hidden, spec.identity_encoders, rng);
      state_encoder_ =
          Encoder(store, prefix + ".state_encoder", feature_dim_, de, spec.hidden, spec.identity_encoders, rng);
      feature_width_ = de;
      if (spec.decoder) {
        decoder_ = ad::Mlp::create(store, prefix + ".decoder", {{de, spec.hidden, spec.obs_dim}, ad::Activation::Tanh},
                                   rng);
        has_decoder_ = true;
      }
    } else if (spec.decoder) {
      throw ConfigError(spec.variant + " has no observation encoder to pair with a decoder");
    }
  }

  bool has_decoder() const override { return has_decoder_; }

  Tensor ae_loss(const Tensor& ys) const override {
    if (!has_decoder_) return MeasurementModel::ae_loss(ys);
    return ad::sum(ad::square(decoder_.apply(obs_encoder_(ys)) - ys));
  }

 protected:
  void check(const Tensor& y, const Tensor& x) const {
    if (y.rows() != 1 || y.cols() != spec_.obs_dim) throw ShapeError(name() + ": observation must be 1 x d_Y");
    if (x.cols() != spec_.state_dim) throw ShapeError(name() + ": particle width differs from state width");
  }
  Tensor state_features(const Tensor& x) const {
    Tensor f = features_(x);
    if (f.cols() != feature_dim_) throw ShapeError(name() + ": state feature width mismatch");
    return f;
  }
  Tensor finite(const Tensor& t) const {
    if (!t.all_finite()) throw NumericError(name() + ": non-finite log-likelihood");
    return t;
  }

  MeasurementSpec spec_;
  StateFeatures features_;
  Index feature_dim_ = 0;
  Index feature_width_ = 0;
  Encoder obs_encoder_;
  Encoder state_encoder_;
  ad::Mlp decoder_;
  bool has_decoder_ = false;
};

/// y ~ N(x H, obs_var I) with learnable H.
class AnalyticGaussian final : public Base {
 public:
  AnalyticGaussian(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng)
      : Base(store, prefix, spec, rng, false) {
    if (!(spec.obs_var > 0.0)) throw ConfigError("analytic_gaussian: obs_var must be positive");
    h_ = store.add(prefix + ".H", spec.init_h * Matrix::Identity(spec.state_dim, spec.obs_dim));
  }
  std::string name() const override { return "analytic_gaussian"; }
  bool normalised() const override { return true; }
  Tensor log_likelihood(const Tensor& y, const Tensor& x) const override {
    check(y, x);
    const Tensor r = y - ad::matmul(x, h_);
    const double log_norm = 0.5 * (kLog2Pi + std::log(spec_.obs_var));
    return finite(ad::sum(-0.5 * ad::square(r) / spec_.obs_var - log_norm, ad::Axis::Cols));
  }

 private:
  Tensor h_;
};

/// Learned compatibility h(E(y), O(x)) made positive by softplus.
class NnScalar final : public Base {
 public:
  NnScalar(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng)
      : Base(store, prefix, spec, rng, true) {
    compat_ = ad::Mlp::create(store, prefix + ".compat", {{3 * feature_width_, spec.hidden, 1}, ad::Activation::Tanh},
                              rng);
  }
  std::string name() const override { return "nn_scalar"; }
  bool normalised() const override { return false; }
  Tensor log_likelihood(const Tensor& y, const Tensor& x) const override {
    check(y, x);
    const Tensor o = state_encoder_(state_features(x));
    const Tensor e = ad::repeat_rows(obs_encoder_(y), x.rows());
    const Tensor h = compat_.apply(ad::concat({e, o, ad::square(e - o)}, ad::Axis::Cols));
    return finite(ad::log(ad::softplus(h) + kScoreFloor));
  }

 private:
  ad::Mlp compat_;
};

/// Score 1 / (1 - cos(E(y), O(x))), capped at 1 / 1e-6.
class FeatureCosine final : public Base {
 public:
  FeatureCosine(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng)
      : Base(store, prefix, spec, rng, true) {}
  std::string name() const override { return "feature_cosine"; }
  bool normalised() const override { return false; }
  Tensor log_likelihood(const Tensor& y, const Tensor& x) const override {
    check(y, x);
    const Tensor o = state_encoder_(state_features(x));
    const Tensor e = obs_encoder_(y);
    const Tensor dot = ad::sum(e * o, ad::Axis::Cols);
    const Tensor norm_e = ad::sqrt(ad::sum(ad::square(e)) + 1e-12);
    const Tensor norm_o = ad::sqrt(ad::sum(ad::square(o), ad::Axis::Cols) + 1e-12);
    const Tensor distance = 1.0 - dot / (norm_e * norm_o);
    return finite(-ad::log(ad::maximum(distance, kCosineFloor)));
  }
};

/// E(y) ~ N(O(x), sigma_obs^2 I) with learnable log sigma_obs.
class FeatureGaussian final : public Base {
 public:
  FeatureGaussian(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng)
      : Base(store, prefix, spec, rng, true) {
    if (!(spec.sigma_obs > 0.0)) throw ConfigError("feature_gaussian: sigma_obs must be positive");
    log_sigma_ = store.add(prefix + ".log_sigma", Matrix::Constant(1, 1, std::log(spec.sigma_obs)));
  }
  std::string name() const override { return "feature_gaussian"; }
  bool normalised() const override { return false; }
  Tensor log_likelihood(const Tensor& y, const Tensor& x) const override {
    check(y, x);
    const Tensor o = state_encoder_(state_features(x));
    const Tensor e = obs_encoder_(y);
    return finite(GaussianDynamic::diag_normal_log_density(e, o, log_sigma_));
  }

 private:
  Tensor log_sigma_;
};

/// p(y | x) = p_z(F(y; x)) |det dF/dy| with a standard-normal p_z.
class FlowMeasurement final : public Base {
 public:
  FlowMeasurement(ad::ParamStore& store, const std::string& prefix, const MeasurementSpec& spec, Rng& rng)
      : Base(store, prefix, spec, rng, false) {
    ad::FlowSpec fs{spec.obs_dim, feature_dim_, spec.flow_depth, spec.flow_width};
    flow_ = ad::CouplingFlow::create(store, prefix + ".flow", fs, rng);
  }
  std::string name() const override { return "cnf_measurement"; }
  bool normalised() const override { return true; }
  Tensor log_likelihood(const Tensor& y, const Tensor& x) const override {
    check(y, x);
    const ad::FlowResult z = flow_.forward(ad::repeat_rows(y, x.rows()), state_features(x));
    return finite(standard_normal_log_density(z.y) + z.log_det);
  }

 private:
  ad::CouplingFlow flow_;
};

}  // namespace

Tensor MeasurementModel::ae_loss(const Tensor&) const {
  throw ConfigError(name() + " has no decoder; the auto-encoder loss needs one");
}

std::unique_ptr<MeasurementModel> make_measurement(ad::ParamStore& store, const std::string& prefix,
                                                   const MeasurementSpec& spec, Rng& rng) {
  if (spec.obs_dim < 1 || spec.state_dim < 1) throw ConfigError("measurement widths must be positive");
  if (spec.variant == "analytic_gaussian") return std::make_unique<AnalyticGaussian>(store, prefix, spec, rng);
  if (spec.variant == "nn_scalar") return std::make_unique<NnScalar>(store, prefix, spec, rng);
  if (spec.variant == "feature_cosine") return std::make_unique<FeatureCosine>(store, prefix, spec, rng);
  if (spec.variant == "feature_gaussian") return std::make_unique<FeatureGaussian>(store, prefix, spec, rng);
  if (spec.variant == "cnf_measurement") return std::make_unique<FlowMeasurement>(store, prefix, spec, rng);
  throw ConfigError("unknown measurement \"" + spec.variant +
                    "\"; valid: analytic_gaussian, nn_scalar, feature_cosine, feature_gaussian, cnf_measurement");
}

}  // namespace dpf::components
