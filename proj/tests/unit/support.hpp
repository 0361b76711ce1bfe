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

#ifndef DPF_TESTS_SUPPORT_HPP_
#define DPF_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dpf/ad/ops.hpp"

namespace dpf::test {

using ad::Matrix;
using ad::Tensor;
using Fn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Scalar probe sum(f(x) .* w); w fixed so every output entry contributes.
inline double probe_value(const Fn& f, const std::vector<Matrix>& inputs, const Matrix& w) {
  std::vector<Tensor> xs;
  for (const auto& m : inputs) xs.emplace_back(m);
  return (f(xs).value().array() * w.array()).sum();
}

inline std::vector<Matrix> tape_grads(const Fn& f, const std::vector<Matrix>& inputs, const Matrix& w) {
  std::vector<Tensor> xs;
  for (const auto& m : inputs) xs.emplace_back(m, true);
  ad::Tape tape;
  {
    ad::TapeScope scope(tape);
    const Tensor root = ad::sum(f(xs) * Tensor(w));
    ad::backward(root);
  }
  std::vector<Matrix> out;
  for (const auto& x : xs) out.push_back(x.has_grad() ? x.grad() : Matrix::Zero(x.rows(), x.cols()));
  return out;
}

/// Central differences (f(x + h) - f(x - h)) / 2h, entry by entry.
inline std::vector<Matrix> numeric_grads(const Fn& f, std::vector<Matrix> inputs, const Matrix& w, double h) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Matrix g(inputs[k].rows(), inputs[k].cols());
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].data()[i];
      inputs[k].data()[i] = x0 + h;
      const double up = probe_value(f, inputs, w);
      inputs[k].data()[i] = x0 - h;
      const double down = probe_value(f, inputs, w);
      inputs[k].data()[i] = x0;
      g.data()[i] = (up - down) / (2.0 * h);
    }
    out.push_back(g);
  }
  return out;
}

inline double max_rel_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b, double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (Eigen::Index i = 0; i < a[k].size(); ++i) {
      const double x = a[k].data()[i], y = b[k].data()[i];
      worst = std::max(worst, std::abs(x - y) / (std::abs(x) + std::abs(y) + floor));
    }
  }
  return worst;
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_var(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace dpf::test

#endif  // DPF_TESTS_SUPPORT_HPP_
