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
#include <filesystem>
#include <fstream>

#include "dpf/ad/checkpoint.hpp"
#include "dpf/ad/flow.hpp"
#include "dpf/ad/grad_check.hpp"
#include "dpf/ad/nn.hpp"
#include "dpf/error.hpp"
#include "dpf/random.hpp"

namespace {

namespace ad = dpf::ad;
using ad::Index;
using ad::Matrix;
using ad::Tensor;

void perturb(ad::ParamStore& store, double scale, std::uint64_t seed) {
  dpf::Rng rng(seed);
  for (auto& slot : store.slots()) {
    slot.param.mutable_value() = scale * rng.normal_matrix(slot.param.rows(), slot.param.cols());
  }
}

// log|det J| of x -> flow(x) for a single row, by central differences.
double numeric_log_det(const ad::CouplingFlow& flow, const Matrix& x, const Tensor& cond) {
  const Index d = x.cols();
  Matrix jac(d, d);
  const double h = 1e-6;
  for (Index j = 0; j < d; ++j) {
    Matrix up = x, down = x;
    up(0, j) += h;
    down(0, j) -= h;
    const Matrix fu = flow.forward(Tensor(up), cond).y.value();
    const Matrix fd = flow.forward(Tensor(down), cond).y.value();
    jac.col(j) = ((fu - fd) / (2 * h)).transpose();
  }
  return std::log(std::abs(jac.determinant()));
}

TEST(Mlp, ShapesAndZeroFinalLayer) {
  ad::ParamStore store;
  dpf::Rng rng(1);
  const auto net = ad::Mlp::create(store, "net", {{3, 8, 8, 2}}, rng);
  const auto zero = ad::Mlp::create(store, "zero", {{3, 8, 2}}, rng, ad::MlpInit::ZeroFinalLayer);
  EXPECT_TRUE(store.contains("net.w0"));
  EXPECT_TRUE(store.contains("net.b2"));
  EXPECT_EQ(store.total_elements(), (3 * 8 + 8 + 8 * 8 + 8 + 8 * 2 + 2) + (3 * 8 + 8 + 8 * 2 + 2));
  const Tensor x(rng.normal_matrix(5, 3));
  const Tensor y = net.apply(x);
  EXPECT_EQ(y.rows(), 5);
  EXPECT_EQ(y.cols(), 2);
  EXPECT_TRUE(y.value().isApprox(ad::mlp_apply(store, "net", x, net.spec()).value()));
  EXPECT_DOUBLE_EQ(zero.apply(x).value().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(net.apply(Tensor(rng.normal_matrix(5, 4))), dpf::ShapeError);
}

TEST(Mlp, RowsAreIndependent) {
  ad::ParamStore store;
  dpf::Rng rng(2);
  const auto net = ad::Mlp::create(store, "net", {{2, 6, 1}, ad::Activation::Relu}, rng);
  const Matrix x = rng.normal_matrix(4, 2);
  const Matrix all = net.apply(Tensor(x)).value();
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(net.apply(Tensor(Matrix(x.row(i)))).item(), all(i, 0), 1e-14);
  }
}

TEST(Mlp, GradientsPassCheck) {
  ad::ParamStore store;
  dpf::Rng rng(3);
  const auto net = ad::Mlp::create(store, "net", {{2, 5, 1}}, rng);
  const Matrix x = rng.normal_matrix(6, 2);
  const auto r = ad::grad_check([&](ad::ParamStore&) { return ad::mean(ad::square(net.apply(Tensor(x)))); },
                                store, 1e-6);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Flow, FreshFlowIsIdentity) {
  ad::ParamStore store;
  dpf::Rng rng(4);
  const auto flow = ad::CouplingFlow::create(store, "f", {3, 2, 4, 16}, rng);
  const Tensor x(rng.normal_matrix(7, 3));
  const Tensor c(rng.normal_matrix(1, 2));
  const auto out = flow.forward(x, c);
  EXPECT_DOUBLE_EQ((out.y.value() - x.value()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(out.log_det.value().cwiseAbs().maxCoeff(), 0.0);
}

class FlowDims : public ::testing::TestWithParam<std::pair<Index, Index>> {};

TEST_P(FlowDims, InverseRoundTripAndLogDet) {
  const auto [dim, cond_dim] = GetParam();
  ad::ParamStore store;
  dpf::Rng rng(5 + static_cast<std::uint64_t>(dim));
  const auto flow = ad::CouplingFlow::create(store, "f", {dim, cond_dim, 4, 16}, rng);
  perturb(store, 0.3, 99);
  const Tensor x(rng.normal_matrix(6, dim));
  const Tensor c = cond_dim > 0 ? Tensor(rng.normal_matrix(6, cond_dim)) : Tensor();
  const auto fwd = flow.forward(x, c);
  const auto inv = flow.inverse(fwd.y, c);
  EXPECT_LT((inv.y.value() - x.value()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((fwd.log_det.value() + inv.log_det.value()).cwiseAbs().maxCoeff(), 1e-9);
  for (Index i = 0; i < 6; ++i) {
    const Tensor ci = cond_dim > 0 ? Tensor(Matrix(c.value().row(i))) : Tensor();
    EXPECT_NEAR(fwd.log_det(i, 0), numeric_log_det(flow, Matrix(x.value().row(i)), ci), 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, FlowDims,
                         ::testing::Values(std::pair<Index, Index>{1, 0}, std::pair<Index, Index>{1, 2},
                                           std::pair<Index, Index>{2, 0}, std::pair<Index, Index>{3, 1}));

TEST(Flow, SingleConditioningRowBroadcasts) {
  ad::ParamStore store;
  dpf::Rng rng(6);
  const auto flow = ad::CouplingFlow::create(store, "f", {2, 1, 2, 8}, rng);
  perturb(store, 0.3, 7);
  const Matrix x = rng.normal_matrix(3, 2);
  const Matrix c = Matrix::Constant(1, 1, 0.4);
  const Matrix one = flow.forward(Tensor(x), Tensor(c)).y.value();
  const Matrix many = flow.forward(Tensor(x), Tensor(Matrix::Constant(3, 1, 0.4))).y.value();
  EXPECT_LT((one - many).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Flow, GradientsPassCheck) {
  ad::ParamStore store;
  dpf::Rng rng(8);
  const auto flow = ad::CouplingFlow::create(store, "f", {2, 1, 2, 6}, rng);
  perturb(store, 0.3, 9);
  const Matrix x = rng.normal_matrix(4, 2);
  const Matrix c = rng.normal_matrix(4, 1);
  auto f = [&](ad::ParamStore&) {
    const auto out = flow.forward(Tensor(x), Tensor(c));
    return ad::sum(ad::square(out.y)) + ad::sum(out.log_det);
  };
  EXPECT_LT(ad::grad_check(f, store, 1e-6).max_rel_error, 1e-5);
}

TEST(Reparam, PathwiseGradientOfSecondMoment) {
  // E[x^2] = mu^2 + sigma^2: d/dmu = 2 mu, d/dlog_sigma = 2 sigma^2.
  dpf::Rng rng(10);
  const Matrix mu = Matrix::Constant(1, 1, 0.7);
  const Matrix log_std = Matrix::Constant(1, 1, std::log(0.5));
  const int k = 20000;
  const auto g = ad::pathwise_gradient([](const Tensor& x) { return ad::square(x); }, mu, log_std, k, rng);
  // Per-sample std of 2x is 2 sigma = 1; of 2 sigma eps^2 ... is 2 sigma^2 sqrt(2) = 0.71.
  EXPECT_NEAR(g.d_mean(0, 0), 1.4, 4.0 / std::sqrt(k));
  EXPECT_NEAR(g.d_log_std(0, 0), 0.5, 4.0 * 0.71 / std::sqrt(k));
}

TEST(Reparam, SampleUsesMeanAndScale) {
  const Tensor m = Tensor::scalar(1.0);
  const Tensor s = Tensor::scalar(std::log(2.0));
  EXPECT_DOUBLE_EQ(ad::reparam_gaussian(m, s, Tensor::scalar(-1.5)).item(), -2.0);
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("dpf_ckpt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripRestoresValuesAndMetadata) {
  ad::ParamStore a;
  dpf::Rng rng(12);
  ad::Mlp::create(a, "net", {{2, 3, 1}}, rng);
  a.add("theta", rng.normal_matrix(2, 2));
  save_checkpoint(a, dir_ / "model", {{"flow_depth", 4}});

  ad::ParamStore b;
  dpf::Rng other(13);
  ad::Mlp::create(b, "net", {{2, 3, 1}}, other);
  b.add("theta", Matrix::Zero(2, 2));
  const auto meta = load_checkpoint(b, dir_ / "model");
  EXPECT_EQ(meta.at("flow_depth").get<int>(), 4);
  for (const auto& name : a.names()) {
    EXPECT_EQ(a.get(name).value(), b.get(name).value()) << name;
  }
}

TEST_F(CheckpointTest, ShapeMismatchAndMissingParameterAreErrors) {
  ad::ParamStore a;
  a.add("theta", Matrix::Ones(2, 2));
  save_checkpoint(a, dir_ / "model");
  ad::ParamStore wrong;
  wrong.add("theta", Matrix::Ones(3, 1));
  EXPECT_THROW(load_checkpoint(wrong, dir_ / "model"), dpf::ShapeError);
  ad::ParamStore extra;
  extra.add("theta", Matrix::Ones(2, 2));
  extra.add("phi", Matrix::Ones(1, 1));
  EXPECT_THROW(load_checkpoint(extra, dir_ / "model"), dpf::Error);
  EXPECT_THROW(load_checkpoint(a, dir_ / "missing"), dpf::IoError);
}

TEST_F(CheckpointTest, TruncatedBlobIsRejected) {
  ad::ParamStore a;
  a.add("theta", Matrix::Ones(4, 4));
  save_checkpoint(a, dir_ / "model");
  std::filesystem::resize_file(dir_ / "model.bin", 16);
  EXPECT_THROW(load_checkpoint(a, dir_ / "model"), dpf::IoError);
}

}  // namespace
