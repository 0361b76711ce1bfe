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

#include "dpf/cli/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "dpf/binary_io.hpp"
#include "dpf/error.hpp"

namespace dpf::cli {

MetricsRecord make_metrics(const filter::FilterOutput& out, const ad::Matrix& truth) {
  MetricsRecord rec;
  const ad::Matrix means = out.mean_values();
  rec.state_dim = means.cols();
  rec.has_truth = truth.size() > 0;
  if (rec.has_truth && (truth.rows() != means.rows() || truth.cols() != means.cols())) {
    throw ShapeError("make_metrics: truth must hold one row per filter mean");
  }
  const auto increments = out.increment_values();
  for (std::size_t k = 0; k < increments.size(); ++k) {
    const auto t = static_cast<Eigen::Index>(k + 1);
    MetricsRow row;
    row.t = static_cast<long>(t);
    row.ess = out.ess[k + 1];
    row.l_t = increments[k];
    row.mean = means.row(t).transpose();
    if (rec.has_truth) {
      row.truth = truth.row(t).transpose();
      row.rmse = (row.mean - row.truth).norm();
    } else {
      row.rmse = std::numeric_limits<double>::quiet_NaN();
    }
    rec.rows.push_back(std::move(row));
  }
  return rec;
}

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::string metrics_csv(const MetricsRecord& record) {
  std::string out = "t,ess,l_t";
  for (long j = 0; j < record.state_dim; ++j) out += ",mean_" + std::to_string(j);
  if (record.has_truth) {
    for (long j = 0; j < record.state_dim; ++j) out += ",truth_" + std::to_string(j);
  }
  out += ",rmse\n";
  for (const auto& row : record.rows) {
    out += std::to_string(row.t) + "," + format_real(row.ess) + "," + format_real(row.l_t);
    for (Eigen::Index j = 0; j < row.mean.size(); ++j) out += "," + format_real(row.mean(j));
    for (Eigen::Index j = 0; j < row.truth.size(); ++j) out += "," + format_real(row.truth(j));
    out += "," + format_real(row.rmse) + "\n";
  }
  return out;
}

void write_metrics(const MetricsRecord& record, const std::filesystem::path& path) {
  io::write_text(path, metrics_csv(record));
}

}  // namespace dpf::cli
