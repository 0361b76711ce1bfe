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

#include <sys/wait.h>

#include <charconv>
#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "dpf/ad/checkpoint.hpp"
#include "dpf/cli/config.hpp"
#include "dpf/cli/experiment.hpp"
#include "dpf/cli/metrics.hpp"
#include "dpf/error.hpp"
#include "dpf/ssm/dataset.hpp"

namespace {

namespace cli = dpf::cli;
namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string error_of(const json& j) {
  try {
    cli::parse_config(j);
  } catch (const dpf::ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigGetsDefaults) {
  const auto c = cli::parse_config({{"model", "lgssm"}, {"loss", "elbo"}});
  EXPECT_EQ(c.num_particles, 100);
  EXPECT_EQ(c.resampler, "multinomial");
  EXPECT_DOUBLE_EQ(c.ess_min_frac, 0.5);
  EXPECT_EQ(c.dynamic, "gaussian_const");
  EXPECT_EQ(c.measurement, "analytic_gaussian");
  EXPECT_EQ(c.flow_depth, 4);
  EXPECT_EQ(c.flow_width, 32);
  EXPECT_EQ(c.feature_width, 16);
  EXPECT_FALSE(c.identity_encoders);
  const auto p = cli::parse_config({{"model", "planar"}, {"loss", "pose"}});
  EXPECT_EQ(p.dynamic, "robot_motion");
  EXPECT_EQ(p.resampler, "soft");
}

TEST(Config, ErrorsNameTheKeyAndValidSet) {
  const std::string bad_resampler = error_of({{"model", "lgssm"}, {"resampler", "foo"}});
  EXPECT_NE(bad_resampler.find("resampler"), std::string::npos);
  EXPECT_NE(bad_resampler.find("weight_preserving"), std::string::npos);
  EXPECT_NE(error_of({{"model", "lgssm"}, {"num_partciles", 5}}).find("num_partciles"), std::string::npos);
  EXPECT_NE(error_of({{"model", "lgssm"}, {"num_particles", 0}}).find("num_particles"), std::string::npos);
  EXPECT_NE(error_of({{"model", "lgssm"}, {"ess_min_frac", 1.5}}).find("ess_min_frac"), std::string::npos);
  EXPECT_NE(error_of({{"model", "lgssm"}, {"lr", "fast"}}).find("lr"), std::string::npos);
  EXPECT_NE(error_of({{"model", "lgssm"}, {"measurement", "psychic"}}).find("feature_cosine"), std::string::npos);
  EXPECT_FALSE(error_of(json::object()).empty());
  EXPECT_FALSE(error_of({{"model", "lgssm"}, {"measurement", "nn_scalar"}, {"loss", "elbo"}}).empty());
  EXPECT_FALSE(
      error_of({{"model", "lgssm"}, {"measurement", "feature_cosine"}, {"proposal", "cnf_proposal"}, {"loss", "rmse"}})
          .empty());
  EXPECT_THROW(cli::parse_config_file("/nonexistent/config.json"), dpf::ConfigError);
}

TEST(Config, RoundTripIsLossless) {
  const json input = {{"model", "lgssm"},   {"loss", "combined"}, {"block_count", 2}, {"lr", 0.003},
                      {"resampler", "ot"}, {"ot_epsilon", 0.05}, {"seed", 123456789012345ULL},
                      {"identity_encoders", true}};
  const auto c = cli::parse_config(input);
  const json canonical = cli::to_json(c);
  const auto again = cli::parse_config(canonical);
  EXPECT_TRUE(again == c);
  EXPECT_EQ(cli::to_json(again), canonical);
  EXPECT_EQ(canonical.at("seed").get<std::uint64_t>(), 123456789012345ULL);
  EXPECT_TRUE(again.identity_encoders);
  EXPECT_THROW(cli::parse_config({{"model", "lgssm"}, {"identity_encoders", 1}}), dpf::ConfigError);
}

TEST(Metrics, HeaderOnlyForEmptyRun) {
  cli::MetricsRecord rec;
  rec.state_dim = 2;
  rec.has_truth = true;
  EXPECT_EQ(cli::metrics_csv(rec), "t,ess,l_t,mean_0,mean_1,truth_0,truth_1,rmse\n");
  rec.has_truth = false;
  EXPECT_EQ(cli::metrics_csv(rec), "t,ess,l_t,mean_0,mean_1,rmse\n");
}

TEST(Metrics, RealsRoundTripWithDotSeparator) {
  // A comma-decimal locale must not leak into the output.
  std::setlocale(LC_ALL, "de_DE.UTF-8");
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, 2.0}) {
    const std::string s = cli::format_real(v);
    EXPECT_EQ(s.find(','), std::string::npos) << s;
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(cli::format_real(0.5), "0.5");
  std::setlocale(LC_ALL, "C");
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  cli::ExperimentConfig lgssm_config(const std::string& out) const {
    auto c = cli::parse_config({{"model", "lgssm"},
                                {"num_trajectories", 3},
                                {"steps", 20},
                                {"num_particles", 200},
                                {"seed", 5},
                                {"dataset", (dir_ / "data").string()},
                                {"out_dir", (dir_ / out).string()}});
    return c;
  }
  fs::path dir_;
};

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header) {
  std::ifstream in(p);
  std::getline(in, *header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      std::from_chars(cell.data(), cell.data() + cell.size(), v);
      row.push_back(v);
    }
    rows.push_back(row);
  }
  return rows;
}

TEST_F(ExperimentTest, FilterWritesMetricsWhoseIncrementsSumToTheSummary) {
  const auto c = lgssm_config("run");
  cli::run_experiment(c, "generate");
  cli::run_experiment(c, "filter");
  const json summary = json::parse(slurp(dir_ / "run" / "filter_summary.json"));
  ASSERT_EQ(summary.at("runs").size(), 3u);
  std::string header;
  const auto rows = read_csv(dir_ / "run" / "metrics" / "traj_0000.csv", &header);
  EXPECT_EQ(header, "t,ess,l_t,mean_0,truth_0,rmse");
  ASSERT_EQ(rows.size(), 20u);
  double total = 0.0;
  for (const auto& r : rows) total += r[2];
  EXPECT_EQ(total, summary["runs"][0]["log_evidence"].get<double>());
}

TEST_F(ExperimentTest, FilterTwiceIsByteIdentical) {
  const auto a = lgssm_config("a");
  const auto b = lgssm_config("b");
  cli::run_experiment(a, "generate");
  cli::run_experiment(a, "filter");
  cli::run_experiment(b, "filter");
  for (const char* f : {"traj_0000.csv", "traj_0001.csv", "traj_0002.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / "metrics" / f), slurp(dir_ / "b" / "metrics" / f)) << f;
  }
}

TEST_F(ExperimentTest, EvaluateReportsKalmanComparison) {
  auto c = lgssm_config("eval");
  c.num_particles = 10000;
  c.steps = 50;
  cli::run_experiment(c, "generate");
  cli::run_experiment(c, "evaluate");
  const json s = json::parse(slurp(dir_ / "eval" / "evaluate_summary.json"));
  ASSERT_TRUE(s.contains("mean_log_evidence_rel_error"));
  for (const auto& run : s.at("runs")) {
    EXPECT_LT(run.at("log_evidence_rel_error").get<double>(), 0.01);
    EXPECT_TRUE(run.contains("kalman_log_evidence"));
  }
}

TEST_F(ExperimentTest, ZeroEpochTrainingSavesTheInitialisation) {
  auto c = lgssm_config("train");
  c.epochs = 0;
  c.init_theta1 = 0.3;
  c.init_theta2 = 0.5;
  cli::run_experiment(c, "generate");
  cli::run_experiment(c, "train");
  const auto ds = dpf::ssm::load_dataset(c.dataset_dir());
  auto fresh = cli::load_components(c, ds);
  const auto init = cli::load_components(c, ds);
  const json meta = dpf::ad::load_checkpoint(fresh.params, dir_ / "train" / "final");
  EXPECT_EQ(meta.at("flow_depth").get<int>(), 4);
  for (const auto& name : init.params.names()) {
    EXPECT_EQ(fresh.params.get(name).value(), init.params.get(name).value()) << name;
  }
  const json manifest = json::parse(slurp(dir_ / "train" / "final.json"));
  EXPECT_TRUE(manifest.dump().find("dynamic.A") != std::string::npos);
}

TEST_F(ExperimentTest, CheckpointWithWrongShapeNamesTheParameter) {
  auto c = lgssm_config("ckpt");
  c.proposal = "cnf_proposal";
  c.flow_width = 8;
  c.epochs = 0;
  cli::run_experiment(c, "generate");
  cli::run_experiment(c, "train");
  c.flow_width = 16;
  c.checkpoint = (dir_ / "ckpt" / "final").string();
  const auto ds = dpf::ssm::load_dataset(c.dataset_dir());
  try {
    cli::load_components(c, ds);
    FAIL() << "expected a shape error";
  } catch (const dpf::ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("proposal.flow"), std::string::npos) << e.what();
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DPF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(ExperimentTest, CliExitCodes) {
  const auto good = dir_ / "good.json";
  std::ofstream(good) << json{{"model", "lgssm"}, {"num_trajectories", 2}, {"steps", 5}, {"num_particles", 20}}.dump();
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"model": "lgssm", "particles": 5})";
  const std::string out = " --out " + (dir_ / "o").string();

  EXPECT_EQ(run_cli("generate --config " + good.string() + out), 0);
  EXPECT_EQ(run_cli("filter --config " + good.string() + " --seed 3" + out), 0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "metrics" / "traj_0001.csv"));
  EXPECT_EQ(run_cli("filter --config " + bad.string() + out), 1);
  EXPECT_EQ(run_cli("filter --config " + (dir_ / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("explode --config " + good.string()), 1);
  EXPECT_EQ(run_cli("filter"), 1);
  // A valid config pointing at a dataset that does not exist is a runtime failure.
  EXPECT_EQ(run_cli("filter --config " + good.string() + " --out " + (dir_ / "empty").string()), 2);
}

}  // namespace
