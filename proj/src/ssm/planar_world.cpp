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

#include "dpf/ssm/planar_world.hpp"

#include <algorithm>
#include <vector>

#include "dpf/error.hpp"

namespace dpf::ssm {

using ad::Tensor;

Tensor robot_transition(const Tensor& poses, const Eigen::Vector3d& action, const Tensor& noise) {
  if (poses.cols() != 3 || noise.cols() != 3 || noise.rows() != poses.rows()) {
    throw ShapeError("robot_transition expects N x 3 poses and noise");
  }
  const Tensor h = ad::slice_cols(poses, 2, 1) + ad::slice_cols(noise, 2, 1);
  const Tensor c = ad::cos(h);
  const Tensor s = ad::sin(h);
  const Tensor s1 = ad::slice_cols(poses, 0, 1) + c * action(0) + s * action(1) + ad::slice_cols(noise, 0, 1);
  const Tensor s2 = ad::slice_cols(poses, 1, 1) + s * action(0) - c * action(1) + ad::slice_cols(noise, 1, 1);
  const Tensor heading = ad::wrap_angle(h + action(2));
  return ad::concat({s1, s2, heading}, ad::Axis::Cols);
}

Tensor observe_patches(const PlanarWorld& world, const Tensor& poses) {
  if (poses.cols() != 3) throw ShapeError("observe_patches expects N x 3 poses");
  const Index p = world.patch_size();
  // Pixel offsets relative to the pose, in the robot frame.
  Matrix dx(1, p);
  Matrix dy(1, p);
  for (Index r = 0; r < world.patch_rows; ++r) {
    for (Index c = 0; c < world.patch_cols; ++c) {
      dx(0, r * world.patch_cols + c) = static_cast<double>(c - world.patch_cols / 2);
      dy(0, r * world.patch_cols + c) = static_cast<double>(r - world.patch_rows / 2);
    }
  }
  const Tensor off_x(dx);
  const Tensor off_y(dy);
  const Tensor heading = ad::slice_cols(poses, 2, 1);
  const Tensor c = ad::cos(heading);
  const Tensor s = ad::sin(heading);
  const Tensor cols = ad::slice_cols(poses, 0, 1) + c * off_x - s * off_y;
  const Tensor rows = ad::slice_cols(poses, 1, 1) + s * off_x + c * off_y;
  return ad::bilinear_sample(world.map, rows, cols, world.border);
}

Matrix observe_patch(const PlanarWorld& world, const Eigen::Vector3d& pose) {
  const Tensor patch = observe_patches(world, Tensor(Matrix(pose.transpose())));
  return Eigen::Map<const Matrix>(patch.value().data(), world.patch_rows, world.patch_cols);
}

Matrix make_smooth_map(Index rows, Index cols, double blur_sigma, Rng& rng) {
  if (rows < 1 || cols < 1) throw ConfigError("map extents must be positive");
  const Matrix noise = rng.normal_matrix(rows, cols);
  const auto radius = static_cast<Index>(std::ceil(3.0 * blur_sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (Index k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (blur_sigma * blur_sigma));
  }
  // Separable blur with clamped (replicated) borders.
  auto clampi = [](Index v, Index lo, Index hi) { return std::clamp(v, lo, hi); };
  Matrix tmp = Matrix::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0, norm = 0.0;
      for (Index k = -radius; k <= radius; ++k) {
        const double w = kernel[static_cast<std::size_t>(k + radius)];
        acc += w * noise(r, clampi(c + k, 0, cols - 1));
        norm += w;
      }
      tmp(r, c) = acc / norm;
    }
  }
  Matrix out = Matrix::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0, norm = 0.0;
      for (Index k = -radius; k <= radius; ++k) {
        const double w = kernel[static_cast<std::size_t>(k + radius)];
        acc += w * tmp(clampi(r + k, 0, rows - 1), c);
        norm += w;
      }
      out(r, c) = acc / norm;
    }
  }
  const double lo = out.minCoeff();
  const double hi = out.maxCoeff();
  if (hi > lo) out = ((out.array() - lo) / (hi - lo)).matrix();
  return out;
}

VectorXd PlanarWorldSsm::sample_initial(Rng& rng) const {
  const auto h = static_cast<double>(world_.map.rows());
  const auto w = static_cast<double>(world_.map.cols());
  VectorXd x(3);
  x(0) = w * (0.3 + 0.4 * rng.uniform());
  x(1) = h * (0.3 + 0.4 * rng.uniform());
  x(2) = wrap_angle(std::numbers::pi * (2.0 * rng.uniform() - 1.0));
  return x;
}

VectorXd PlanarWorldSsm::sample_action(Index /*t*/, const VectorXd& state, Rng& rng) const {
  const double cx = 0.5 * static_cast<double>(world_.map.cols() - 1);
  const double cy = 0.5 * static_cast<double>(world_.map.rows() - 1);
  const double dx = cx - state(0);
  const double dy = cy - state(1);
  const double dist = std::hypot(dx, dy);
  const double limit = 0.25 * static_cast<double>(std::min(world_.map.rows(), world_.map.cols()));
  VectorXd a(3);
  a(0) = 0.6 + 0.6 * rng.uniform();
  a(1) = 0.1 * rng.normal();
  // Steer back toward the centre once the robot wanders too far out.
  const double turn = dist > limit ? 0.4 * wrap_angle(std::atan2(dy, dx) - state(2)) : 0.0;
  a(2) = turn + 0.15 * rng.normal();
  return a;
}

VectorXd PlanarWorldSsm::sample_transition(const VectorXd& state, const VectorXd& action, Rng& rng) const {
  Eigen::Vector3d noise;
  noise(0) = world_.sigma_s1 * rng.normal();
  noise(1) = world_.sigma_s2 * rng.normal();
  noise(2) = world_.sigma_heading * rng.normal();
  return robot_transition<double>(state.head<3>(), action.head<3>(), noise);
}

VectorXd PlanarWorldSsm::sample_observation(const VectorXd& state, Rng& rng) const {
  const Matrix patch = observe_patch(world_, state.head<3>());
  VectorXd y(patch.size());
  for (Index i = 0; i < patch.size(); ++i) y(i) = patch.data()[i] + world_.pixel_noise * rng.normal();
  return y;
}

}  // namespace dpf::ssm
