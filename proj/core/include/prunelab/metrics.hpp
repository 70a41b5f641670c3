// Copyright 2026 The prunelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRUNELAB_METRICS_HPP_
#define PRUNELAB_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prunelab {

// One row per (run, phase, epoch). Epoch 0 is the state before the phase's
// first update. Quantities that do not apply are NaN and print as "nan".
struct MetricsRow {
  std::string run_id;
  std::string pipeline;
  std::uint64_t seed = 0;
  std::string phase;  // "teacher" or "student"
  std::size_t epoch = 0;
  double lr = NAN;
  double train_loss = NAN;
  double train_acc = NAN;
  double val_loss = NAN;
  double val_acc = NAN;
  double test_loss = NAN;
  double test_acc = NAN;
  int classes = 0;
  std::size_t test_samples = 0;
  double removed_fraction = 0.0;
  double flow_drift = NAN;
  double norm_product = NAN;
  double flow_norm = NAN;
  std::vector<std::pair<int, double>> band_errors;  // (k, relative error)
};

// run_id,pipeline,seed,phase,epoch,lr,train_loss,train_acc,val_loss,val_acc,
// test_loss,test_acc,classes,test_samples,removed_fraction,flow_drift,
// norm_product,flow_norm,band_errors
// band_errors is "k:err;k:err" (empty without a probe).
std::string_view metrics_header();
std::string to_csv_line(const MetricsRow& row);
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);
void write_text_file(const std::filesystem::path& path, std::string_view text);

struct SummaryLine {
  std::string pipeline;
  double removed_fraction = 0.0;
  std::size_t runs = 0;
  double mean_test_acc = 0.0;
  double sd_test_acc = 0.0;
  bool collapsed = false;
};

// Groups the final row of every run by (pipeline, removed_fraction) and
// reports mean and sample sd of final test accuracy. A group is "collapsed"
// when its mean accuracy is within 3 binomial standard errors of 1/classes.
std::vector<SummaryLine> summarize(const std::vector<MetricsRow>& rows);
std::string summary_table(const std::vector<SummaryLine>& lines);

double median(std::vector<double> values);

}  // namespace prunelab

#endif  // PRUNELAB_METRICS_HPP_
