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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dpf/ad/grad_check.hpp"
#include "dpf/ad/ops.hpp"
#include "dpf/ad/param_store.hpp"
#include "dpf/error.hpp"
#include "dpf/random.hpp"
#include "support.hpp"

namespace {

using dpf::ad::Axis;
using dpf::ad::Index;
using dpf::ad::Matrix;
using dpf::ad::Tensor;
namespace ad = dpf::ad;
namespace t = dpf::test;

struct OpCase {
  std::string name;
  t::Fn f;
  // Input shapes; each input is drawn N(0,1) then passed through `shape_input`.
  std::vector<std::pair<Index, Index>> shapes;
  std::function<Matrix(Matrix)> shape_input = [](Matrix m) { return m; };
};

Matrix positive(Matrix m) { return (m.array().abs() + 0.5).matrix(); }

// Keeps inputs away from kinks at 0 and at the clamp bounds.
Matrix off_kinks(Matrix m) {
  for (Index i = 0; i < m.size(); ++i) {
    double& v = m.data()[i];
    if (std::abs(v) < 0.1) v += v < 0 ? -0.2 : 0.2;
    if (std::abs(std::abs(v) - 1.0) < 0.1) v *= 1.3;
  }
  return m;
}

std::vector<OpCase> op_cases() {
  const std::vector<Index> idx = {2, 0, 2, 1};
  return {
      {"add", [](auto& x) { return x[0] + x[1]; }, {{3, 2}, {3, 2}}},
      {"add_broadcast", [](auto& x) { return x[0] + x[1]; }, {{3, 2}, {1, 2}}},
      {"sub_broadcast", [](auto& x) { return x[0] - x[1]; }, {{3, 2}, {3, 1}}},
      {"mul", [](auto& x) { return x[0] * x[1]; }, {{3, 2}, {1, 1}}},
      {"div", [](auto& x) { return x[0] / x[1]; }, {{3, 2}, {3, 2}}, positive},
      {"neg", [](auto& x) { return -x[0]; }, {{2, 3}}},
      {"exp", [](auto& x) { return ad::exp(x[0]); }, {{2, 3}}},
      {"log", [](auto& x) { return ad::log(x[0]); }, {{2, 3}}, positive},
      {"tanh", [](auto& x) { return ad::tanh(x[0]); }, {{2, 3}}},
      {"relu", [](auto& x) { return ad::relu(x[0]); }, {{2, 3}}, off_kinks},
      {"square", [](auto& x) { return ad::square(x[0]); }, {{2, 3}}},
      {"sqrt", [](auto& x) { return ad::sqrt(x[0]); }, {{2, 3}}, positive},
      {"sin", [](auto& x) { return ad::sin(x[0]); }, {{2, 3}}},
      {"cos", [](auto& x) { return ad::cos(x[0]); }, {{2, 3}}},
      {"softplus", [](auto& x) { return ad::softplus(x[0]); }, {{2, 3}}},
      {"sigmoid", [](auto& x) { return ad::sigmoid(x[0]); }, {{2, 3}}},
      {"clamp", [](auto& x) { return ad::clamp(x[0], -1.0, 1.0); }, {{2, 3}}, off_kinks},
      {"maximum", [](auto& x) { return ad::maximum(x[0], 0.0); }, {{2, 3}}, off_kinks},
      {"wrap_angle", [](auto& x) { return ad::wrap_angle(x[0]); }, {{2, 3}}},
      {"matmul", [](auto& x) { return ad::matmul(x[0], x[1]); }, {{3, 4}, {4, 2}}},
      {"transpose", [](auto& x) { return ad::transpose(x[0]); }, {{3, 2}}},
      {"sum", [](auto& x) { return ad::sum(x[0]); }, {{3, 2}}},
      {"sum_rows", [](auto& x) { return ad::sum(x[0], Axis::Rows); }, {{3, 2}}},
      {"sum_cols", [](auto& x) { return ad::sum(x[0], Axis::Cols); }, {{3, 2}}},
      {"mean", [](auto& x) { return ad::mean(x[0]); }, {{3, 2}}},
      {"mean_cols", [](auto& x) { return ad::mean(x[0], Axis::Cols); }, {{3, 2}}},
      {"logsumexp", [](auto& x) { return ad::logsumexp(x[0]); }, {{4, 2}}},
      {"logsumexp_rows", [](auto& x) { return ad::logsumexp(x[0], Axis::Rows); }, {{4, 2}}},
      {"log_softmax", [](auto& x) { return ad::log_softmax(x[0], Axis::Rows); }, {{4, 2}}},
      {"softmax", [](auto& x) { return ad::softmax(x[0], Axis::Cols); }, {{2, 4}}},
      {"concat_rows", [](auto& x) { return ad::concat({x[0], x[1]}, Axis::Rows); }, {{2, 3}, {1, 3}}},
      {"concat_cols", [](auto& x) { return ad::concat({x[0], x[1]}, Axis::Cols); }, {{2, 3}, {2, 1}}},
      {"slice_rows", [](auto& x) { return ad::slice_rows(x[0], 1, 2); }, {{4, 2}}},
      {"slice_cols", [](auto& x) { return ad::slice_cols(x[0], 1, 2); }, {{2, 4}}},
      {"gather_rows", [idx](auto& x) { return ad::gather_rows(x[0], idx); }, {{3, 2}}},
      {"gather_cols", [idx](auto& x) { return ad::gather_cols(x[0], idx); }, {{2, 3}}},
      {"repeat_rows", [](auto& x) { return ad::repeat_rows(x[0], 3); }, {{1, 2}}},
      {"bilinear_sample",
       [](auto& x) {
         Matrix image(4, 5);
         for (Index i = 0; i < image.size(); ++i) image.data()[i] = std::sin(0.7 * static_cast<double>(i));
         return ad::bilinear_sample(image, x[0], x[1], 0.3);
       },
       {{3, 1}, {3, 1}},
       [](Matrix m) {
         // Coordinates inside the image and away from integer grid lines.
         for (Index i = 0; i < m.size(); ++i) {
           double v = 1.5 + std::tanh(m.data()[i]);
           if (std::abs(v - std::round(v)) < 0.05) v += 0.1;
           m.data()[i] = v;
         }
         return m;
       }},
  };
}

TEST(OpGradients, MatchCentralDifferencesAtRandomPoints) {
  dpf::Rng rng(11);
  for (const auto& c : op_cases()) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Matrix> inputs;
      for (auto [r, cc] : c.shapes) inputs.push_back(c.shape_input(rng.normal_matrix(r, cc)));
      std::vector<Tensor> probe_in;
      for (const auto& m : inputs) probe_in.emplace_back(m);
      const Tensor out = c.f(probe_in);
      const Matrix w = rng.normal_matrix(out.rows(), out.cols());
      const auto analytic = t::tape_grads(c.f, inputs, w);
      const auto numeric = t::numeric_grads(c.f, inputs, w, 1e-6);
      EXPECT_LT(t::max_rel_error(analytic, numeric), 1e-5) << c.name << " trial " << trial;
    }
  }
}

TEST(Ops, ForwardValues) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix b(2, 1);
  b << 10, 20;
  const Tensor s = Tensor(a) + Tensor(b);
  EXPECT_DOUBLE_EQ(s(0, 1), 12.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 23.0);
  EXPECT_DOUBLE_EQ(ad::matmul(Tensor(a), Tensor(b))(1, 0), 110.0);
  EXPECT_NEAR(ad::logsumexp(Tensor(a)).item(), std::log(std::exp(1) + std::exp(2) + std::exp(3) + std::exp(4)),
              1e-12);
  const Tensor sm = ad::softmax(Tensor(a), Axis::Cols);
  EXPECT_NEAR(sm(0, 0) + sm(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(ad::wrap_angle(Tensor::scalar(3.0 * M_PI)).item(), M_PI, 1e-12);
  EXPECT_NEAR(ad::wrap_angle(Tensor::scalar(-0.5)).item(), -0.5, 1e-15);
}

TEST(Ops, LogsumexpIsStableForLargeInputs) {
  Matrix a(1, 3);
  a << 1000.0, 1000.0, -1e300;
  EXPECT_NEAR(ad::logsumexp(Tensor(a)).item(), 1000.0 + std::log(2.0), 1e-9);
}

TEST(Ops, BilinearSampleInterpolatesAndUsesBorder) {
  Matrix image(2, 2);
  image << 0, 1, 2, 3;
  Matrix r(3, 1), c(3, 1);
  r << 0.5, 0.0, -2.0;
  c << 0.5, 1.0, 0.0;
  const Tensor v = ad::bilinear_sample(image, Tensor(r), Tensor(c), 7.0);
  EXPECT_NEAR(v(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(v(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(v(2, 0), 7.0, 1e-15);
}

TEST(Ops, ShapeAndDomainErrors) {
  const Tensor a(Matrix::Ones(2, 3));
  const Tensor b(Matrix::Ones(3, 2));
  EXPECT_THROW(a + b, dpf::ShapeError);
  EXPECT_THROW(ad::matmul(a, a), dpf::ShapeError);
  EXPECT_THROW(ad::slice_rows(a, 1, 2), dpf::ShapeError);
  EXPECT_THROW(ad::concat({a, b}, Axis::Rows), dpf::ShapeError);
  EXPECT_THROW(a.item(), dpf::ShapeError);
  EXPECT_THROW(ad::log(Tensor::scalar(-1.0)), dpf::DomainError);
  EXPECT_THROW(ad::sqrt(Tensor::scalar(-1.0)), dpf::DomainError);
  EXPECT_THROW(Tensor::scalar(1.0) / Tensor::scalar(0.0), dpf::DomainError);
  const std::vector<Index> bad = {5};
  EXPECT_THROW(ad::gather_rows(a, bad), dpf::ShapeError);
}

TEST(Backward, AccumulatesThroughSharedSubexpressions) {
  const Tensor x = Tensor::scalar(3.0, true);
  ad::Tape tape;
  {
    ad::TapeScope scope(tape);
    const Tensor y = x * x + x;  // dy/dx = 2x + 1
    ad::backward(y);
  }
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 7.0);
}

TEST(Backward, GradientsAccumulateAcrossTapesUntilZeroed) {
  Tensor x = Tensor::scalar(2.0, true);
  for (int k = 0; k < 2; ++k) {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::backward(ad::square(x));
  }
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 8.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 0.0);
}

TEST(Backward, StopGradientBlocksFlow) {
  const Tensor x = Tensor::scalar(2.0, true);
  ad::Tape tape;
  {
    ad::TapeScope scope(tape);
    const Tensor y = x * ad::stop_gradient(x);
    EXPECT_DOUBLE_EQ(y.item(), 4.0);
    ad::backward(y);
  }
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 2.0);
}

TEST(Backward, NothingIsRecordedWithoutTapeOrGrad) {
  const Tensor x = Tensor::scalar(2.0, true);
  const Tensor c = Tensor::scalar(2.0);
  ad::Tape tape;
  {
    ad::TapeScope scope(tape);
    const Tensor y = c * c;
    EXPECT_EQ(tape.size(), 0u);
    const Tensor z = x * c;
    EXPECT_GT(tape.size(), 0u);
  }
  const Tensor off = x * x;  // no active tape: a constant
  EXPECT_EQ(tape.size(), 1u);
  EXPECT_FALSE(off.requires_grad());
  ad::backward(off);
  EXPECT_FALSE(x.has_grad());
}

TEST(Backward, RejectsNonScalarRootAndSecondPass) {
  const Tensor x(Matrix::Ones(2, 2), true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const Tensor y = ad::exp(x);
  EXPECT_THROW(ad::backward(y), dpf::ShapeError);
  const Tensor s = ad::sum(y);
  ad::backward(s);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(ad::backward(s), dpf::NumericError);
}

TEST(GradCheck, SmoothFunctionPasses) {
  ad::ParamStore store;
  Matrix w(2, 2);
  w << 0.3, -0.2, 0.5, 0.1;
  store.add("w", w);
  store.add("b", Matrix::Constant(1, 2, 0.2));
  Matrix xin(3, 2);
  xin << 1, 2, -1, 0.5, 0.3, -0.7;
  auto f = [&](ad::ParamStore& p) {
    const Tensor h = ad::tanh(ad::matmul(Tensor(xin), p.get("w")) + p.get("b"));
    return ad::logsumexp(h);
  };
  const auto r = ad::grad_check(f, store, 1e-6);
  EXPECT_EQ(r.checked, 6);
  EXPECT_LT(r.max_rel_error, 1e-7);
  EXPECT_DOUBLE_EQ(store.get("w")(0, 0), 0.3);  // values restored
}

TEST(GradCheck, DetectsAWrongAdjoint) {
  ad::ParamStore store;
  store.add("x", Matrix::Constant(1, 1, 0.7));
  // The stop_gradient hides half the true derivative from the tape.
  auto f = [](ad::ParamStore& p) { return p.get("x") * ad::stop_gradient(p.get("x")); };
  const auto r = ad::grad_check(f, store, 1e-6);
  EXPECT_GT(r.max_rel_error, 0.3);
  EXPECT_EQ(r.worst_parameter, "x");
}

TEST(Optimizer, SgdStepMatchesHandComputation) {
  ad::ParamStore store;
  const Tensor x = store.add("x", Matrix::Constant(1, 1, 3.0));
  {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::backward(ad::square(x));
  }
  ad::OptimizerSettings opt;
  opt.kind = ad::OptimizerKind::Sgd;
  opt.lr = 0.1;
  ad::optimizer_step(store, opt);
  EXPECT_DOUBLE_EQ(x(0, 0), 3.0 - 0.1 * 6.0);
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 0.0);
}

TEST(Optimizer, AdamFirstStepHasMagnitudeLr) {
  ad::ParamStore store;
  const Tensor x = store.add("x", Matrix::Constant(1, 2, 1.0));
  {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Matrix scale(1, 2);
    scale << 5.0, -0.01;
    ad::backward(ad::sum(x * Tensor(scale)));
  }
  ad::OptimizerSettings opt;
  opt.lr = 0.05;
  ad::optimizer_step(store, opt);
  EXPECT_NEAR(x(0, 0), 0.95, 1e-6);
  EXPECT_NEAR(x(0, 1), 1.05, 1e-4);
}

TEST(Optimizer, AdamMinimisesAQuadratic) {
  ad::ParamStore store;
  const Tensor x = store.add("x", Matrix::Constant(1, 1, -4.0));
  ad::OptimizerSettings opt;
  opt.lr = 0.1;
  for (int i = 0; i < 500; ++i) {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::backward(ad::square(x - Tensor::scalar(1.5)));
    ad::optimizer_step(store, opt);
  }
  EXPECT_NEAR(x(0, 0), 1.5, 1e-3);
}

TEST(Optimizer, NonFiniteGradientIsReported) {
  ad::ParamStore store;
  const Tensor x = store.add("weird", Matrix::Constant(1, 1, 0.0));
  {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::backward(ad::sqrt(x));  // infinite slope at 0
  }
  try {
    ad::optimizer_step(store, {});
    FAIL() << "expected NumericError";
  } catch (const dpf::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("weird"), std::string::npos);
  }
}

}  // namespace
