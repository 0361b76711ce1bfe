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

#ifndef DPF_SSM_PLANAR_WORLD_HPP_
#define DPF_SSM_PLANAR_WORLD_HPP_

#include <cmath>
#include <numbers>

#include "dpf/ad/ops.hpp"
#include "dpf/ssm/model.hpp"

namespace dpf::ssm {

/// Robot on a 2-D occupancy grid. Pose [s1, s2, heading]: s1 runs along map
/// columns, s2 along rows, both in cells; heading in radians, wrapped to (-pi, pi].
struct PlanarWorld {
  Matrix map;                 // H x W occupancy in [0, 1]
  double sigma_s1 = 0.2;      // motion noise scales (cells, cells, radians)
  double sigma_s2 = 0.2;
  double sigma_heading = 0.05;
  Index patch_rows = 8;
  Index patch_cols = 8;
  double border = 0.5;        // value read outside the map
  double pixel_noise = 0.1;   // std of the Gaussian noise added to observed patches

  Index patch_size() const { return patch_rows * patch_cols; }
};

template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar w = std::remainder(a, Scalar(2) * pi);
  if (w <= -pi) w += Scalar(2) * pi;
  return w;
}

/// Pose update with action [v1, v2, omega] and noise draws [a1, a2, a3]:
///   h = heading + a3; heading' = h + omega;
///   s1' = s1 + v1 cos h + v2 sin h + a1;  s2' = s2 + v1 sin h - v2 cos h + a2.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> robot_transition(const Eigen::Matrix<Scalar, 3, 1>& pose,
                                             const Eigen::Matrix<Scalar, 3, 1>& action,
                                             const Eigen::Matrix<Scalar, 3, 1>& noise) {
  using std::cos;
  using std::sin;
  const Scalar h = pose(2) + noise(2);
  Eigen::Matrix<Scalar, 3, 1> out;
  out(0) = pose(0) + action(0) * cos(h) + action(1) * sin(h) + noise(0);
  out(1) = pose(1) + action(0) * sin(h) - action(1) * cos(h) + noise(1);
  out(2) = wrap_angle(h + action(2));
  return out;
}

/// Batched on-tape form: poses and noise are N x 3, action is shared.
ad::Tensor robot_transition(const ad::Tensor& poses, const Eigen::Vector3d& action, const ad::Tensor& noise);

/// Local patches around each pose (N x patch_rows*patch_cols, row-major pixels),
/// sampled bilinearly on a pose-centred grid rotated by the heading.
/// Differentiable with respect to the poses.
ad::Tensor observe_patches(const PlanarWorld& world, const ad::Tensor& poses);

/// Single-pose patch as a patch_rows x patch_cols matrix.
Matrix observe_patch(const PlanarWorld& world, const Eigen::Vector3d& pose);

/// Seeded smooth random field: Gaussian blur of white noise, rescaled to [0, 1].
Matrix make_smooth_map(Index rows, Index cols, double blur_sigma, Rng& rng);

class PlanarWorldSsm final : public StateSpaceModel {
 public:
  explicit PlanarWorldSsm(PlanarWorld world) : world_(std::move(world)) {}

  std::string id() const override { return "planar"; }
  Index state_dim() const override { return 3; }
  Index obs_dim() const override { return world_.patch_size(); }
  Index action_dim() const override { return 3; }

  VectorXd sample_initial(Rng& rng) const override;
  VectorXd sample_action(Index t, const VectorXd& state, Rng& rng) const override;
  VectorXd sample_transition(const VectorXd& state, const VectorXd& action, Rng& rng) const override;
  VectorXd sample_observation(const VectorXd& state, Rng& rng) const override;

  const PlanarWorld& world() const { return world_; }

 private:
  PlanarWorld world_;
};

}  // namespace dpf::ssm

#endif  // DPF_SSM_PLANAR_WORLD_HPP_
