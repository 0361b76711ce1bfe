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
#include <iterator>
#include <numbers>

#include "dpf/ad/checkpoint.hpp"
#include "dpf/components/builder.hpp"
#include "dpf/error.hpp"
#include "dpf/objectives/losses.hpp"
#include "dpf/objectives/train.hpp"
#include "dpf/ssm/linear_gaussian.hpp"
#include "dpf/ssm/simulate.hpp"
#include "support.hpp"

namespace {

namespace ad = dpf::ad;
namespace comp = dpf::components;
namespace flt = dpf::filter;
namespace obj = dpf::objectives;
namespace rs = dpf::resampling;
namespace ssm = dpf::ssm;
using ad::Index;
using ad::Matrix;
using ad::Tensor;

comp::FilterComponents lgssm_components(double theta1 = 0.9, double theta2 = 1.0) {
  comp::ComponentSpec s;
  s.init_theta1 = theta1;
  s.init_theta2 = theta2;
  return build_components(s);
}

flt::FilterConfig config(Index n, rs::Scheme scheme = rs::Scheme::Soft) {
  flt::FilterConfig c;
  c.num_particles = n;
  c.resample.scheme = scheme;
  return c;
}

std::vector<Tensor> rows_of(const Matrix& m) {
  std::vector<Tensor> out;
  for (Index i = 0; i < m.rows(); ++i) out.emplace_back(Matrix(m.row(i)));
  return out;
}

flt::ParticleEnsemble ensemble(const Matrix& x, const Eigen::VectorXd& w) {
  flt::ParticleEnsemble e;
  e.particles = Tensor(x);
  e.log_norm_weights = Tensor(Matrix(w.array().log().matrix()));
  return e;
}

TEST(Rmse, Examples) {
  Matrix truth(2, 1), est(2, 1);
  truth << 1.0, -1.0;
  est << 4.0, 3.0;
  EXPECT_NEAR(obj::rmse_loss(rows_of(est), truth).item(), std::sqrt(12.5), 1e-14);
  EXPECT_DOUBLE_EQ(obj::rmse_loss(rows_of(truth), truth).item(), 0.0);
  EXPECT_THROW(obj::rmse_loss(rows_of(est), Matrix::Zero(3, 1)), dpf::ShapeError);
}

TEST(Rmse, GradientMatchesFiniteDifferences) {
  dpf::Rng rng(1);
  const Matrix truth = rng.normal_matrix(5, 2);
  const dpf::test::Fn f = [&](const std::vector<Tensor>& x) {
    std::vector<Tensor> rows;
    for (Index i = 0; i < 5; ++i) rows.push_back(ad::slice_rows(x[0], i, 1));
    return obj::rmse_loss(rows, truth);
  };
  const Matrix x = rng.normal_matrix(5, 2);
  const Matrix probe = Matrix::Ones(1, 1);
  EXPECT_LT(dpf::test::max_rel_error(dpf::test::tape_grads(f, {x}, probe),
                                     dpf::test::numeric_grads(f, {x}, probe, 1e-6)),
            1e-5);
}

TEST(GmmLoss, Examples) {
  const Matrix truth = Matrix::Constant(1, 1, 0.3);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  EXPECT_NEAR(obj::gmm_loglik_loss({ensemble(truth, Eigen::VectorXd::Ones(1))}, truth, one).item(), 0.0, 1e-15);
  Matrix pair(2, 1);
  pair << -0.7, 1.3;
  EXPECT_NEAR(obj::gmm_loglik_loss({ensemble(pair, Eigen::Vector2d(0.5, 0.5))}, truth, one).item(), 0.5, 1e-14);
  const double far = obj::gmm_loglik_loss({ensemble(Matrix::Constant(2, 1, 1e4), Eigen::Vector2d(0.5, 0.5))}, truth,
                                          one)
                         .item();
  EXPECT_TRUE(std::isfinite(far));
  EXPECT_GT(far, 1e6);
  // |Sigma| enters as -log |Sigma|^{-1/2}.
  EXPECT_NEAR(obj::gmm_loglik_loss({ensemble(truth, Eigen::VectorXd::Ones(1))}, truth, Eigen::VectorXd::Constant(1, 4.0))
                  .item(),
              0.5 * std::log(4.0), 1e-14);
}

TEST(GmmLoss, MonotoneAsAParticleApproaches) {
  dpf::Rng rng(2);
  const Matrix truth = rng.normal_matrix(1, 2);
  Matrix x = rng.normal_matrix(4, 2) * 2.0;
  const Eigen::VectorXd w = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  const Eigen::VectorXd sigma = Eigen::Vector2d(0.5, 2.0);
  double prev = obj::gmm_loglik_loss({ensemble(x, w)}, truth, sigma).item();
  const Eigen::RowVector2d dir = truth.row(0) - x.row(2);
  for (int k = 0; k < 10; ++k) {
    x.row(2) += 0.1 * dir;
    const double next = obj::gmm_loglik_loss({ensemble(x, w)}, truth, sigma).item();
    EXPECT_LT(next, prev);
    prev = next;
  }
}

TEST(Elbo, SingleParticleIsPathLikelihood) {
  const auto comps = lgssm_components();
  const auto traj = ssm::simulate(ssm::LinearGaussianSsm(), 10, 3);
  auto cfg = config(1, rs::Scheme::None);
  cfg.retain_ensembles = true;
  dpf::Rng rng(4);
  const auto out = flt::run_filter(traj, comps, cfg, rng);
  double path = 0.0;
  for (Index t = 1; t <= 10; ++t) {
    path += ssm::normal_log_density(traj.observations(t - 1, 0), out.ensembles[t].particles(0, 0), 0.1);
  }
  EXPECT_NEAR(obj::elbo_loss(out).item(), -path, 1e-10);
}

TEST(Elbo, BoundAndTighteningWithParticles) {
  const auto comps = lgssm_components();
  const auto traj = ssm::simulate(ssm::LinearGaussianSsm(), 30, 5);
  const double exact = ssm::kalman_filter({}, traj).log_evidence;
  std::vector<double> mean_elbo;
  for (Index n : {10, 1000}) {
    std::vector<double> elbos;
    for (std::uint64_t r = 0; r < 40; ++r) {
      dpf::Rng rng(dpf::derive_seed(6, r));
      elbos.push_back(-obj::elbo_loss(flt::run_filter(traj, comps, config(n, rs::Scheme::Multinomial), rng)).item());
    }
    const double m = dpf::test::sample_mean(elbos);
    EXPECT_LE(m, exact + 3 * std::sqrt(dpf::test::sample_var(elbos) / 40)) << n;
    mean_elbo.push_back(m);
  }
  EXPECT_GE(mean_elbo[1], mean_elbo[0]);
}

TEST(PseudoLikelihood, SingleBlockIsElbo) {
  const auto comps = lgssm_components();
  const auto traj = ssm::simulate(ssm::LinearGaussianSsm(), 12, 7);
  dpf::Rng a(8), b(8);
  const double pseudo =
      obj::pseudo_likelihood_loss(traj.observations, Matrix(), {12, 1}, comps, config(50), a).item();
  const double elbo = obj::elbo_loss(flt::run_filter(traj, comps, config(50), b)).item();
  EXPECT_DOUBLE_EQ(pseudo, elbo);
}

TEST(PseudoLikelihood, BlocksAddUpAndErrors) {
  const auto comps = lgssm_components();
  const auto traj = ssm::simulate(ssm::LinearGaussianSsm(), 12, 9);
  dpf::Rng a(10), b(10);
  const double pseudo = obj::pseudo_likelihood_loss(traj.observations, Matrix(), {5, 2}, comps, config(50), a).item();
  const double b0 = obj::block_elbo_loss(traj.observations, Matrix(), 0, {5, 2}, comps, config(50), b).item();
  const double b1 = obj::block_elbo_loss(traj.observations, Matrix(), 1, {5, 2}, comps, config(50), b).item();
  EXPECT_DOUBLE_EQ(pseudo, b0 + b1);
  // Block 1 reads y_6..y_10 only: changing y_11, y_12 or y_1..y_5 leaves it alone.
  Matrix edited = traj.observations;
  edited.topRows(5).setConstant(9.0);
  edited.bottomRows(2).setConstant(-9.0);
  dpf::Rng c(10), d(10);
  obj::block_elbo_loss(traj.observations, Matrix(), 0, {5, 2}, comps, config(50), c);
  obj::block_elbo_loss(edited, Matrix(), 0, {5, 2}, comps, config(50), d);
  EXPECT_DOUBLE_EQ(obj::block_elbo_loss(edited, Matrix(), 1, {5, 2}, comps, config(50), d).item(), b1);
  EXPECT_THROW(obj::pseudo_likelihood_loss(traj.observations, Matrix(), {5, 3}, comps, config(50), a),
               dpf::ConfigError);
  EXPECT_THROW(obj::pseudo_likelihood_loss(traj.observations, Matrix(), {0, 1}, comps, config(50), a),
               dpf::ConfigError);
}

TEST(Combined, ExamplesAndLinearityOfGradients) {
  const Tensor sup = Tensor::scalar(2.0);
  const Tensor pseudo = Tensor::scalar(10.0);
  EXPECT_DOUBLE_EQ(obj::combined_objective(sup, pseudo, 1.0, 0.0, 2, true).item(), 2.0);
  EXPECT_DOUBLE_EQ(obj::combined_objective(sup, pseudo, 0.0, 1.0, 2, true).item(), 5.0);
  EXPECT_DOUBLE_EQ(obj::combined_objective(sup, pseudo, 3.0, 1.0, 2, false).item(), 5.0);
  EXPECT_DOUBLE_EQ(obj::combined_objective(sup, pseudo, 1.0, 1.0, 1, true).item(), 12.0);
  EXPECT_THROW(obj::combined_objective(sup, pseudo, -1.0, 1.0, 1, true), dpf::ConfigError);

  // Gradient of the combination equals the combination of gradients.
  auto comps = lgssm_components(0.7, 0.8);
  const auto traj = ssm::simulate(ssm::LinearGaussianSsm(), 8, 11);
  const obj::BlockSpec blocks{4, 2};
  auto grads = [&](int which) {
    comps.params.zero_grad();
    dpf::Rng r1(12), r2(13);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    const Tensor s = obj::rmse_loss(flt::run_filter(traj, comps, config(20), r1).means, traj.states);
    const Tensor p = obj::pseudo_likelihood_loss(traj.observations, Matrix(), blocks, comps, config(20), r2);
    const Tensor root = which == 0 ? s : which == 1 ? p : obj::combined_objective(s, p, 0.3, 1.7, 2, true);
    ad::backward(root);
    std::vector<Matrix> g;
    for (const auto& slot : comps.params.slots()) g.push_back(slot.param.grad());
    return g;
  };
  const auto gs = grads(0), gp = grads(1), gc = grads(2);
  for (std::size_t k = 0; k < gc.size(); ++k) {
    EXPECT_LT((gc[k] - (0.3 * gs[k] + 0.85 * gp[k])).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PoseLoss, HeadingWeightAndWrap) {
  Matrix truth(2, 3), est(2, 3);
  truth << 0, 0, 3.1, 1, 1, -3.1;
  est << 0.5, 0, -3.1, 1, 2, 3.1;
  const double pos = 0.25 + 1.0;
  const double wrapped = 2 * std::pow(2 * std::numbers::pi - 6.2, 2);
  EXPECT_NEAR(obj::pose_loss(rows_of(est), truth, 0.0).item(), pos, 1e-12);
  EXPECT_NEAR(obj::pose_loss(rows_of(est), truth, 2.0).item(), pos + 2.0 * wrapped, 1e-12);
}

obj::TrainSettings lgssm_train_settings(int epochs, double lr) {
  obj::TrainSettings s;
  s.loss.kind = "elbo";
  s.filter = config(30);
  s.optimizer.lr = lr;
  s.epochs = epochs;
  s.minibatch = 4;
  s.seed = 14;
  return s;
}

class TrainTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("dpf_train_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    data_ = ssm::make_dataset(ssm::LinearGaussianSsm(), 10, 12, 15);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::span<const ssm::Trajectory> train_part() const { return {data_.trajectories.data(), 8}; }
  std::span<const ssm::Trajectory> val_part() const { return {data_.trajectories.data() + 8, 2}; }
  std::filesystem::path dir_;
  ssm::Dataset data_;
};

TEST_F(TrainTest, ZeroLearningRateLeavesParametersUnchanged) {
  auto comps = lgssm_components(0.3, 0.5);
  auto settings = lgssm_train_settings(3, 0.0);
  settings.optimizer.kind = ad::OptimizerKind::Sgd;
  const auto state = obj::train(comps, train_part(), val_part(), settings);
  EXPECT_DOUBLE_EQ(comps.params.get("dynamic.A")(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(comps.params.get("measurement.H")(0, 0), 0.5);
  EXPECT_EQ(state.curve.size(), 4u);
}

TEST_F(TrainTest, TrainingImprovesTheValidationLoss) {
  auto comps = lgssm_components(0.3, 0.5);
  const auto state = obj::train(comps, train_part(), val_part(), lgssm_train_settings(8, 0.05));
  EXPECT_LT(state.best_validation, state.curve.front().validation_loss);
  EXPECT_GT(comps.params.get("dynamic.A")(0, 0), 0.3);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST_F(TrainTest, SameSeedGivesIdenticalCheckpoints) {
  for (const char* run : {"a", "b"}) {
    auto comps = lgssm_components(0.3, 0.5);
    auto settings = lgssm_train_settings(2, 0.05);
    settings.out_dir = dir_ / run;
    obj::train(comps, train_part(), val_part(), settings);
  }
  for (const char* f : {"final.bin", "final.json", "best.bin", "training_curve.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(TrainTest, DivergenceAbortsAndKeepsBestCheckpoint) {
  auto comps = lgssm_components(0.3, 0.5);
  auto settings = lgssm_train_settings(3, 1e200);
  settings.optimizer.kind = ad::OptimizerKind::Sgd;
  settings.out_dir = dir_;
  EXPECT_THROW(obj::train(comps, train_part(), val_part(), settings), dpf::NumericError);
  auto fresh = lgssm_components(0.0, 0.0);
  ad::load_checkpoint(fresh.params, dir_ / "best");
  EXPECT_DOUBLE_EQ(fresh.params.get("dynamic.A")(0, 0), 0.3);
}

TEST(ValidateLoss, Rejections) {
  comp::ComponentSpec s;
  s.measurement = "nn_scalar";
  const auto nn = build_components(s);
  obj::LossSettings loss;
  for (const char* kind : {"elbo", "pseudo_lik", "combined"}) {
    loss.kind = kind;
    EXPECT_THROW(obj::validate_loss(loss, nn), dpf::ConfigError) << kind;
  }
  loss.kind = "rmse";
  EXPECT_NO_THROW(obj::validate_loss(loss, nn));
  loss.kind = "hinge";
  EXPECT_THROW(obj::validate_loss(loss, nn), dpf::ConfigError);
  loss.kind = "rmse";
  loss.ae_weight = 0.5;
  EXPECT_THROW(obj::validate_loss(loss, lgssm_components()), dpf::ConfigError);
}

}  // namespace
