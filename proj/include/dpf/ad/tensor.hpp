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

#ifndef DPF_AD_TENSOR_HPP_
#define DPF_AD_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace dpf::ad {

using Index = Eigen::Index;
/// Dense row-major storage backing every tensor. Tensors are at most rank 2;
/// scalars are 1x1, per-particle quantities are N x d.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = MatrixX<double>;

class TapeState;

struct Node {
  Matrix value;
  Matrix grad;
  bool has_grad = false;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents.
  std::function<void(Node&)> backward;
  std::weak_ptr<TapeState> tape;
  std::size_t position = 0;

  void accumulate(const Matrix& g);
};

/// Handle to a node of the differentiation graph. Copies share the node, so a
/// parameter held by a model and by a ParamStore is the same object.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor zeros(Index rows, Index cols);
  static Tensor constant(Index rows, Index cols, double v);
  static Tensor column(const Eigen::VectorXd& v);
  static Tensor row(const Eigen::VectorXd& v);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  double item() const;
  double operator()(Index r, Index c) const { return node_->value(r, c); }

  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->has_grad; }
  const Matrix& grad() const;
  void zero_grad();
  void clear_grad();

  bool all_finite() const { return node_->value.allFinite(); }

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node> node_;
};

class TapeState {
 public:
  std::vector<std::shared_ptr<Node>> ops;
  bool consumed = false;
};

/// Ordered record of the operations executed while it is active. Single use:
/// one backward pass consumes it.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return state_->ops.size(); }
  bool consumed() const { return state_->consumed; }

  void record(const std::shared_ptr<Node>& node);
  void backward(const Tensor& root);

  const std::shared_ptr<TapeState>& state() const { return state_; }

 private:
  std::shared_ptr<TapeState> state_;
};

/// Makes `tape` the recording tape of the calling thread for the scope lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

/// Populates d(root)/d(leaf) on every requires-grad leaf reachable from the
/// scalar `root`. A root that does not depend on any leaf writes nothing.
void backward(const Tensor& root);

}  // namespace dpf::ad

#endif  // DPF_AD_TENSOR_HPP_
