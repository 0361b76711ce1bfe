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

#ifndef DPF_COMPONENTS_MEASUREMENT_HPP_
#define DPF_COMPONENTS_MEASUREMENT_HPP_

#include <functional>
#include <memory>
#include <string>

#include "dpf/components/dynamic.hpp"

namespace dpf::components {

/// Maps N x d_X particles to the N x k features a measurement model reads.
using StateFeatures = std::function<Tensor(const Tensor&)>;

/// Observation model p(y_t | x_t; theta), or an unnormalised score for it.
class MeasurementModel {
 public:
  virtual ~MeasurementModel() = default;
  virtual std::string name() const = 0;
  /// True when log_likelihood is a normalised log-density in y.
  virtual bool normalised() const = 0;
  /// y is 1 x d_Y, x is N x d_X; returns N x 1.
  virtual Tensor log_likelihood(const Tensor& y, const Tensor& x) const = 0;
  virtual bool has_decoder() const { return false; }
  /// Sum over rows of ||D(E(y)) - y||^2 for a T x d_Y block of observations.
  virtual Tensor ae_loss(const Tensor& ys) const;
};

struct MeasurementSpec {
  std::string variant = "analytic_gaussian";
  Index obs_dim = 1;
  Index state_dim = 1;
  StateFeatures state_features;   // identity when empty
  Index state_feature_dim = 0;    // width of state_features output; state_dim when 0
  Index feature_width = 16;
  Index hidden = 32;
  bool identity_encoders = false; // E and O pass their input through (widths must agree)
  double init_h = 1.0;            // analytic_gaussian: H starts at this multiple of the identity
  double obs_var = 0.1;
  double sigma_obs = 0.5;
  int flow_depth = 4;
  Index flow_width = 32;
  bool decoder = false;
};

std::unique_ptr<MeasurementModel> make_measurement(ad::ParamStore& store, const std::string& prefix,
                                                   const MeasurementSpec& spec, Rng& rng);

}  // namespace dpf::components

#endif  // DPF_COMPONENTS_MEASUREMENT_HPP_
