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

#ifndef DPF_AD_OPS_HPP_
#define DPF_AD_OPS_HPP_

#include <span>
#include <vector>

#include "dpf/ad/tensor.hpp"

namespace dpf::ad {

/// Axis that a reduction collapses. Rows: r x c -> 1 x c. Cols: r x c -> r x 1.
enum class Axis { Rows, Cols };

// Elementwise binary ops broadcast 2-D operands whose extents are equal or 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Hard clamp; the adjoint is zero where the input lies outside [lo, hi].
Tensor clamp(const Tensor& a, double lo, double hi);
/// max(a, floor) elementwise.
Tensor maximum(const Tensor& a, double floor);
/// Wraps angles to (-pi, pi]; unit derivative almost everywhere.
Tensor wrap_angle(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, Axis axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, Axis axis);
Tensor logsumexp(const Tensor& a);
Tensor logsumexp(const Tensor& a, Axis axis);
Tensor log_softmax(const Tensor& a, Axis axis);
Tensor softmax(const Tensor& a, Axis axis);

/// Axis here names the direction of stacking: Rows stacks vertically.
Tensor concat(std::span<const Tensor> parts, Axis axis);
Tensor concat(std::initializer_list<Tensor> parts, Axis axis);
Tensor slice_rows(const Tensor& a, Index begin, Index count);
Tensor slice_cols(const Tensor& a, Index begin, Index count);
Tensor gather_rows(const Tensor& a, std::span<const Index> indices);
Tensor gather_cols(const Tensor& a, std::span<const Index> indices);
/// 1 x c -> n x c.
Tensor repeat_rows(const Tensor& a, Index n);

/// Same value, no adjoint flow.
Tensor stop_gradient(const Tensor& a);

/// Bilinear interpolation of `image` at continuous (row, col) coordinates, with
/// cell centres at integer coordinates. Reads outside the image return `border`.
/// Differentiable with respect to the coordinates.
Tensor bilinear_sample(const Matrix& image, const Tensor& rows, const Tensor& cols, double border);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
inline Tensor operator+(double a, const Tensor& b) { return add(Tensor::scalar(a), b); }
inline Tensor operator-(const Tensor& a, double b) { return sub(a, Tensor::scalar(b)); }
inline Tensor operator-(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
inline Tensor operator*(double a, const Tensor& b) { return mul(Tensor::scalar(a), b); }
inline Tensor operator/(const Tensor& a, double b) { return div(a, Tensor::scalar(b)); }
inline Tensor operator/(double a, const Tensor& b) { return div(Tensor::scalar(a), b); }

}  // namespace dpf::ad

#endif  // DPF_AD_OPS_HPP_
