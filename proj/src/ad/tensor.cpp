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

#include "dpf/ad/tensor.hpp"

#include <string>

#include "dpf/error.hpp"

namespace dpf::ad {

namespace {
thread_local Tape* current_tape = nullptr;
}

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (!has_grad || grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = g;
    has_grad = true;
  } else {
    grad += g;
  }
}

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Tensor(std::move(m), requires_grad);
}

Tensor Tensor::zeros(Index rows, Index cols) { return Tensor(Matrix::Zero(rows, cols)); }

Tensor Tensor::constant(Index rows, Index cols, double v) { return Tensor(Matrix::Constant(rows, cols, v)); }

Tensor Tensor::column(const Eigen::VectorXd& v) { return Tensor(Matrix(v)); }

Tensor Tensor::row(const Eigen::VectorXd& v) { return Tensor(Matrix(v.transpose())); }

double Tensor::item() const {
  if (!is_scalar()) {
    throw ShapeError("item() on a " + std::to_string(rows()) + "x" + std::to_string(cols()) + " tensor");
  }
  return node_->value(0, 0);
}

const Matrix& Tensor::grad() const {
  if (!node_->has_grad) throw NumericError("tensor has no gradient buffer");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad = Matrix::Zero(rows(), cols());
  node_->has_grad = true;
}

void Tensor::clear_grad() {
  node_->grad.resize(0, 0);
  node_->has_grad = false;
}

Tape::Tape() : state_(std::make_shared<TapeState>()) {}

void Tape::record(const std::shared_ptr<Node>& node) {
  if (state_->consumed) throw NumericError("recording on a consumed tape");
  node->tape = state_;
  node->position = state_->ops.size();
  state_->ops.push_back(node);
}

void Tape::backward(const Tensor& root) {
  if (root.defined() && root.requires_grad() && root.node()->tape.lock() != state_) {
    throw NumericError("backward root is not recorded on this tape");
  }
  if (root.defined() && !root.requires_grad() && !state_->consumed) {
    state_->consumed = true;
    return;
  }
  ad::backward(root);
}

TapeScope::TapeScope(Tape& tape) : previous_(current_tape) { current_tape = &tape; }

TapeScope::~TapeScope() { current_tape = previous_; }

Tape* active_tape() { return current_tape; }

void backward(const Tensor& root) {
  if (!root.defined()) throw ShapeError("backward on an undefined tensor");
  if (!root.is_scalar()) {
    throw ShapeError("backward root must be scalar, got " + std::to_string(root.rows()) + "x" +
                     std::to_string(root.cols()));
  }
  const auto& node = root.node();
  if (!node->requires_grad) return;
  auto state = node->tape.lock();
  if (!state) {
    // A leaf used directly as the root.
    if (node->backward) throw NumericError("backward root's tape no longer exists");
    node->accumulate(Matrix::Ones(1, 1));
    return;
  }
  if (state->consumed) throw NumericError("tape already consumed by a previous backward pass");
  state->consumed = true;
  node->grad = Matrix::Ones(1, 1);
  node->has_grad = true;
  for (std::size_t i = node->position + 1; i-- > 0;) {
    Node& op = *state->ops[i];
    if (!op.has_grad || !op.backward) continue;
    op.backward(op);
  }
}

}  // namespace dpf::ad
