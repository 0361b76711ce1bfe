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

#include "dpf/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpf/error.hpp"

namespace dpf::ad {

namespace {

using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_str(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

Tensor make_op(Matrix value, const char* name, std::initializer_list<Tensor> inputs,
               std::function<void(Node&)> bw) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = name;
  Tape* tape = active_tape();
  if (tape != nullptr) {
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.requires_grad();
    if (needs) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (const auto& t : inputs) node->parents.push_back(t.node());
      node->backward = std::move(bw);
      tape->record(node);
    }
  }
  return Tensor(std::move(node));
}

Index broadcast_extent(Index a, Index b, const char* op, const Matrix& x, const Matrix& y) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(x) + " with " + shape_str(y));
}

Array expand(const Matrix& m, Index rows, Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m.array();
  if (m.size() == 1) return Array::Constant(rows, cols, m(0, 0));
  if (m.rows() == 1) return m.array().replicate(rows, 1);
  return m.array().replicate(1, cols);
}

// Sums `g` down to the extents of `target` (inverse of expand).
Matrix reduce_to(const Matrix& g, const Matrix& target) {
  if (g.rows() == target.rows() && g.cols() == target.cols()) return g;
  if (target.size() == 1) return Matrix::Constant(1, 1, g.sum());
  if (target.rows() == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

template <typename Fwd, typename Bwd>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Bwd bwd) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  const Index r = broadcast_extent(x.rows(), y.rows(), name, x, y);
  const Index c = broadcast_extent(x.cols(), y.cols(), name, x, y);
  Matrix out = fwd(expand(x, r, c), expand(y, r, c)).matrix();
  return make_op(std::move(out), name, {a, b}, [r, c, bwd](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const Array ea = expand(pa.value, r, c);
    const Array eb = expand(pb.value, r, c);
    Array ga, gb;
    bwd(self.grad.array(), ea, eb, self.value.array(), ga, gb);
    if (pa.requires_grad) pa.accumulate(reduce_to(ga.matrix(), pa.value));
    if (pb.requires_grad) pb.accumulate(reduce_to(gb.matrix(), pb.value));
  });
}

template <typename Fwd, typename Bwd>
Tensor unary(const Tensor& a, const char* name, Fwd fwd, Bwd bwd) {
  Matrix out = fwd(a.value().array()).matrix();
  return make_op(std::move(out), name, {a}, [bwd](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(bwd(self.grad.array(), p.value.array(), self.value.array()).matrix());
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](const Array& x, const Array& y) { return Array(x + y); },
      [](const auto& g, const Array&, const Array&, const auto&, Array& ga, Array& gb) {
        ga = g;
        gb = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](const Array& x, const Array& y) { return Array(x - y); },
      [](const auto& g, const Array&, const Array&, const auto&, Array& ga, Array& gb) {
        ga = g;
        gb = -g;
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](const Array& x, const Array& y) { return Array(x * y); },
      [](const auto& g, const Array& x, const Array& y, const auto&, Array& ga, Array& gb) {
        ga = g * y;
        gb = g * x;
      });
}

Tensor div(const Tensor& a, const Tensor& b) {
  if ((b.value().array() == 0.0).any()) throw DomainError("div: division by zero");
  return binary(
      a, b, "div", [](const Array& x, const Array& y) { return Array(x / y); },
      [](const auto& g, const Array&, const Array& y, const auto& out, Array& ga, Array& gb) {
        ga = g / y;
        gb = -g * out / y;
      });
}

Tensor neg(const Tensor& a) {
  return unary(
      a, "neg", [](const auto& x) { return Array(-x); }, [](const auto& g, const auto&, const auto&) { return Array(-g); });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, "exp", [](const auto& x) { return Array(x.exp()); },
      [](const auto& g, const auto&, const auto& out) { return Array(g * out); });
}

Tensor log(const Tensor& a) {
  if ((a.value().array() < 0.0).any()) throw DomainError("log: negative input");
  return unary(
      a, "log", [](const auto& x) { return Array(x.log()); },
      [](const auto& g, const auto& x, const auto&) { return Array(g / x); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](const auto& x) { return Array(x.tanh()); },
      [](const auto& g, const auto&, const auto& out) { return Array(g * (1.0 - out.square())); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](const auto& x) { return Array(x.max(0.0)); },
      [](const auto& g, const auto& x, const auto&) { return Array((x > 0.0).select(g, 0.0)); });
}

Tensor square(const Tensor& a) {
  return unary(
      a, "square", [](const auto& x) { return Array(x.square()); },
      [](const auto& g, const auto& x, const auto&) { return Array(2.0 * g * x); });
}

Tensor sqrt(const Tensor& a) {
  if ((a.value().array() < 0.0).any()) throw DomainError("sqrt: negative input");
  return unary(
      a, "sqrt", [](const auto& x) { return Array(x.sqrt()); },
      [](const auto& g, const auto&, const auto& out) { return Array(g / (2.0 * out)); });
}

Tensor sin(const Tensor& a) {
  return unary(
      a, "sin", [](const auto& x) { return Array(x.sin()); },
      [](const auto& g, const auto& x, const auto&) { return Array(g * x.cos()); });
}

Tensor cos(const Tensor& a) {
  return unary(
      a, "cos", [](const auto& x) { return Array(x.cos()); },
      [](const auto& g, const auto& x, const auto&) { return Array(-g * x.sin()); });
}

Tensor softplus(const Tensor& a) {
  return unary(
      a, "softplus", [](const auto& x) { return Array(x.max(0.0) + (-x.abs()).exp().log1p()); },
      [](const auto& g, const auto& x, const auto&) { return Array(g / (1.0 + (-x).exp())); });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid", [](const auto& x) { return Array(1.0 / (1.0 + (-x).exp())); },
      [](const auto& g, const auto&, const auto& out) { return Array(g * out * (1.0 - out)); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(
      a, "clamp", [lo, hi](const auto& x) { return Array(x.max(lo).min(hi)); },
      [lo, hi](const auto& g, const auto& x, const auto&) { return Array((x >= lo && x <= hi).select(g, 0.0)); });
}

Tensor maximum(const Tensor& a, double floor) {
  return unary(
      a, "maximum", [floor](const auto& x) { return Array(x.max(floor)); },
      [floor](const auto& g, const auto& x, const auto&) { return Array((x >= floor).select(g, 0.0)); });
}

Tensor wrap_angle(const Tensor& a) {
  constexpr double pi = std::numbers::pi;
  return unary(
      a, "wrap_angle",
      [](const auto& x) {
        Array out(x.rows(), x.cols());
        for (Index i = 0; i < x.size(); ++i) {
          double w = std::remainder(x.data()[i], 2.0 * pi);
          if (w <= -pi) w += 2.0 * pi;
          out.data()[i] = w;
        }
        return out;
      },
      [](const auto& g, const auto&, const auto&) { return Array(g); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner extents differ (" + shape_str(a.value()) + " * " + shape_str(b.value()) + ")");
  }
  Matrix out = a.value() * b.value();
  return make_op(std::move(out), "matmul", {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

Tensor transpose(const Tensor& a) {
  Matrix out = a.value().transpose();
  return make_op(std::move(out), "transpose", {a},
                 [](Node& self) { self.parents[0]->accumulate(self.grad.transpose()); });
}

Tensor sum(const Tensor& a) {
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  return make_op(std::move(out), "sum", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
  });
}

Tensor sum(const Tensor& a, Axis axis) {
  Matrix out = axis == Axis::Rows ? Matrix(a.value().colwise().sum()) : Matrix(a.value().rowwise().sum());
  return make_op(std::move(out), "sum_axis", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(expand(self.grad, p.value.rows(), p.value.cols()).matrix());
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  return sum(a) * (1.0 / static_cast<double>(a.size()));
}

Tensor mean(const Tensor& a, Axis axis) {
  const Index n = axis == Axis::Rows ? a.rows() : a.cols();
  if (n == 0) throw ShapeError("mean over an empty axis");
  return sum(a, axis) * (1.0 / static_cast<double>(n));
}

namespace {

double lse(const double* data, Index n, Index stride) {
  double m = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) m = std::max(m, data[i * stride]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::exp(data[i * stride] - m);
  return m + std::log(s);
}

// Softmax weights exp(x - lse) with an all -inf slice mapped to zeros.
Array lse_weights(const Matrix& x, const Matrix& out_expanded) {
  Array w(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    const double l = out_expanded.data()[i];
    w.data()[i] = std::isfinite(l) ? std::exp(x.data()[i] - l) : 0.0;
  }
  return w;
}

}  // namespace

Tensor logsumexp(const Tensor& a) {
  const Matrix& x = a.value();
  Matrix out = Matrix::Constant(1, 1, lse(x.data(), x.size(), 1));
  return make_op(std::move(out), "logsumexp", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    const Matrix l = Matrix::Constant(p.value.rows(), p.value.cols(), self.value(0, 0));
    p.accumulate((lse_weights(p.value, l) * self.grad(0, 0)).matrix());
  });
}

Tensor logsumexp(const Tensor& a, Axis axis) {
  const Matrix& x = a.value();
  Matrix out;
  if (axis == Axis::Rows) {
    out.resize(1, x.cols());
    for (Index j = 0; j < x.cols(); ++j) out(0, j) = lse(x.data() + j, x.rows(), x.cols());
  } else {
    out.resize(x.rows(), 1);
    for (Index i = 0; i < x.rows(); ++i) out(i, 0) = lse(x.data() + i * x.cols(), x.cols(), 1);
  }
  return make_op(std::move(out), "logsumexp_axis", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    const Index r = p.value.rows();
    const Index c = p.value.cols();
    const Matrix l = expand(self.value, r, c).matrix();
    p.accumulate((lse_weights(p.value, l) * expand(self.grad, r, c)).matrix());
  });
}

Tensor log_softmax(const Tensor& a, Axis axis) { return sub(a, logsumexp(a, axis)); }

Tensor softmax(const Tensor& a, Axis axis) { return exp(log_softmax(a, axis)); }

Tensor concat(std::span<const Tensor> parts, Axis axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Index rows = 0;
  Index cols = 0;
  for (const auto& p : parts) {
    if (axis == Axis::Rows) {
      if (p.cols() != parts[0].cols()) throw ShapeError("concat rows: column extents differ");
      rows += p.rows();
      cols = p.cols();
    } else {
      if (p.rows() != parts[0].rows()) throw ShapeError("concat cols: row extents differ");
      cols += p.cols();
      rows = p.rows();
    }
  }
  Matrix out(rows, cols);
  Index offset = 0;
  for (const auto& p : parts) {
    if (axis == Axis::Rows) {
      out.middleRows(offset, p.rows()) = p.value();
      offset += p.rows();
    } else {
      out.middleCols(offset, p.cols()) = p.value();
      offset += p.cols();
    }
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(out);
  node->op = "concat";
  Tape* tape = active_tape();
  const bool needs =
      tape != nullptr && std::any_of(parts.begin(), parts.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    for (const auto& p : parts) node->parents.push_back(p.node());
    node->backward = [axis](Node& self) {
      Index off = 0;
      for (auto& p : self.parents) {
        if (axis == Axis::Rows) {
          if (p->requires_grad) p->accumulate(self.grad.middleRows(off, p->value.rows()));
          off += p->value.rows();
        } else {
          if (p->requires_grad) p->accumulate(self.grad.middleCols(off, p->value.cols()));
          off += p->value.cols();
        }
      }
    };
    tape->record(node);
  }
  return Tensor(std::move(node));
}

Tensor concat(std::initializer_list<Tensor> parts, Axis axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice_rows(const Tensor& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) throw ShapeError("slice_rows out of range");
  Matrix out = a.value().middleRows(begin, count);
  return make_op(std::move(out), "slice_rows", {a}, [begin, count](Node& self) {
    Node& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g.middleRows(begin, count) = self.grad;
    p.accumulate(g);
  });
}

Tensor slice_cols(const Tensor& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) throw ShapeError("slice_cols out of range");
  Matrix out = a.value().middleCols(begin, count);
  return make_op(std::move(out), "slice_cols", {a}, [begin, count](Node& self) {
    Node& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g.middleCols(begin, count) = self.grad;
    p.accumulate(g);
  });
}

Tensor gather_rows(const Tensor& a, std::span<const Index> indices) {
  const Matrix& x = a.value();
  Matrix out(static_cast<Index>(indices.size()), x.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = x.row(indices[i]);
  }
  std::vector<Index> idx(indices.begin(), indices.end());
  return make_op(std::move(out), "gather_rows", {a}, [idx = std::move(idx)](Node& self) {
    Node& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Index>(i));
    p.accumulate(g);
  });
}

Tensor gather_cols(const Tensor& a, std::span<const Index> indices) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 0 || indices[j] >= x.cols()) throw ShapeError("gather_cols: index out of range");
    out.col(static_cast<Index>(j)) = x.col(indices[j]);
  }
  std::vector<Index> idx(indices.begin(), indices.end());
  return make_op(std::move(out), "gather_cols", {a}, [idx = std::move(idx)](Node& self) {
    Node& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) g.col(idx[j]) += self.grad.col(static_cast<Index>(j));
    p.accumulate(g);
  });
}

Tensor repeat_rows(const Tensor& a, Index n) {
  if (a.rows() != 1) throw ShapeError("repeat_rows expects a single-row tensor");
  Matrix out = a.value().replicate(n, 1);
  return make_op(std::move(out), "repeat_rows", {a},
                 [](Node& self) { self.parents[0]->accumulate(self.grad.colwise().sum()); });
}

Tensor stop_gradient(const Tensor& a) { return Tensor(a.value()); }

Tensor bilinear_sample(const Matrix& image, const Tensor& rows, const Tensor& cols, double border) {
  if (rows.rows() != cols.rows() || rows.cols() != cols.cols()) {
    throw ShapeError("bilinear_sample: coordinate tensors differ in shape");
  }
  const Index h = image.rows();
  const Index w = image.cols();
  auto at = [&](Index r, Index c) { return (r < 0 || r >= h || c < 0 || c >= w) ? border : image(r, c); };
  const Matrix& rv = rows.value();
  const Matrix& cv = cols.value();
  Matrix out(rv.rows(), rv.cols());
  Matrix d_row(rv.rows(), rv.cols());
  Matrix d_col(rv.rows(), rv.cols());
  for (Index i = 0; i < rv.size(); ++i) {
    const double r = rv.data()[i];
    const double c = cv.data()[i];
    const double r0f = std::floor(r);
    const double c0f = std::floor(c);
    const double fr = r - r0f;
    const double fc = c - c0f;
    const auto r0 = static_cast<Index>(r0f);
    const auto c0 = static_cast<Index>(c0f);
    const double v00 = at(r0, c0);
    const double v01 = at(r0, c0 + 1);
    const double v10 = at(r0 + 1, c0);
    const double v11 = at(r0 + 1, c0 + 1);
    out.data()[i] = (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11);
    d_row.data()[i] = (1 - fc) * (v10 - v00) + fc * (v11 - v01);
    d_col.data()[i] = (1 - fr) * (v01 - v00) + fr * (v11 - v10);
  }
  return make_op(std::move(out), "bilinear_sample", {rows, cols},
                 [d_row = std::move(d_row), d_col = std::move(d_col)](Node& self) {
                   Node& pr = *self.parents[0];
                   Node& pc = *self.parents[1];
                   if (pr.requires_grad) pr.accumulate(self.grad.cwiseProduct(d_row));
                   if (pc.requires_grad) pc.accumulate(self.grad.cwiseProduct(d_col));
                 });
}

}  // namespace dpf::ad
