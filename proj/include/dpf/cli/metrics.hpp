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

#ifndef DPF_CLI_METRICS_HPP_
#define DPF_CLI_METRICS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpf/filter/filter.hpp"

namespace dpf::cli {

struct MetricsRow {
  long t = 0;
  double ess = 0.0;
  double l_t = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd truth;  // empty when no ground truth
  double rmse = 0.0;      // ||mean - truth||, NaN without truth
};

struct MetricsRecord {
  long state_dim = 0;
  bool has_truth = false;
  std::vector<MetricsRow> rows;  // t = 1..T
};

/// Rows t = 1..T from a filter output; `truth` holds x_0..x_T or is empty.
MetricsRecord make_metrics(const filter::FilterOutput& out, const ad::Matrix& truth);

/// 17 significant digits, so the text reads back to the same double; always '.' as the separator.
std::string format_real(double v);

/// Header "t,ess,l_t,mean_0..,truth_0..,rmse" and one line per row.
std::string metrics_csv(const MetricsRecord& record);
void write_metrics(const MetricsRecord& record, const std::filesystem::path& path);

}  // namespace dpf::cli

#endif  // DPF_CLI_METRICS_HPP_
