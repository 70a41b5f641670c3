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

#ifndef PRUNELAB_PIPELINE_HPP_
#define PRUNELAB_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prunelab/checkpoint.hpp"
#include "prunelab/config.hpp"
#include "prunelab/metrics.hpp"
#include "prunelab/network.hpp"

namespace prunelab {

struct RunOptions {
  // When set, each run writes metrics.csv and checkpoints to
  // <out_dir>/<pipeline>-seed<seed>/.
  std::optional<std::filesystem::path> out_dir;
};

// A trained unpruned network plus the states captured on the way.
struct TeacherResult {
  Checkpoint initial;
  Checkpoint final_state;
  std::map<std::size_t, Checkpoint> snapshots;  // epoch -> state after that epoch
  std::vector<MetricsRow> rows;                 // phase "teacher"
};

// Teachers depend only on the seed and the teacher half of the config, so
// pipelines that share those can share one training run. Thread-safe.
class TeacherCache {
 public:
  std::shared_ptr<const TeacherResult> get(const ExperimentConfig& config, std::uint64_t seed,
                                           const DataSplits& data,
                                           std::span<const std::size_t> snapshot_epochs);

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const TeacherResult>> entries_;
};

TeacherResult train_teacher(const ExperimentConfig& config, std::uint64_t seed,
                            const DataSplits& data, std::span<const std::size_t> snapshot_epochs);

struct RunResult {
  Pipeline pipeline = Pipeline::kWilton;
  std::uint64_t seed = 0;
  std::string run_id;
  std::vector<MetricsRow> rows;
  Network final_net;
  std::optional<MaskSet> mask;
  double final_test_acc = NAN;
  double final_test_loss = NAN;
  double final_val_acc = NAN;
  std::optional<std::filesystem::path> run_dir;
};

// One (config, seed) run of config.pipeline.
RunResult run_pipeline(const ExperimentConfig& config, std::uint64_t seed,
                       const RunOptions& options = {}, TeacherCache* cache = nullptr);

// Every seed in config.seeds; up to $PRUNELAB_THREADS runs at once.
std::vector<RunResult> run_experiment(const ExperimentConfig& config,
                                      const RunOptions& options = {},
                                      TeacherCache* cache = nullptr);

// Require pipeline == wilton / a baseline pipeline respectively.
std::vector<RunResult> run_wilton(const ExperimentConfig& config, const RunOptions& options = {},
                                  TeacherCache* cache = nullptr);
std::vector<RunResult> run_baseline(const ExperimentConfig& config,
                                    const RunOptions& options = {},
                                    TeacherCache* cache = nullptr);

// Distils an existing (pruned) student checkpoint from a teacher checkpoint
// on the config's data. Writes metrics.csv and student_final.wltn directly
// into options.out_dir when set.
RunResult run_distill_stage(const ExperimentConfig& config, std::uint64_t seed,
                            const Checkpoint& teacher, const Checkpoint& student,
                            const RunOptions& options = {});

struct AblationCell {
  std::size_t prune_epoch = 0;
  double ratio = 0.0;
  std::vector<double> test_acc;  // one per seed, in config.seeds order
  double median_test_acc = NAN;
  double mean_test_acc = NAN;
};

struct AblationTable {
  std::vector<std::size_t> epochs;
  std::vector<double> ratios;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationCell> cells;  // ratio-major, then epoch

  const AblationCell& at(std::size_t prune_epoch, double ratio) const;
  // Rows are ratios, columns prune epochs, entries mean final test accuracy.
  std::string matrix_csv() const;
  // ratio,prune_epoch,seed,test_acc
  std::string long_csv() const;
};

// WILTON at every (prune epoch, ratio) pair; one teacher per seed.
AblationTable run_ablation_prune_epoch(const ExperimentConfig& config,
                                       std::span<const std::size_t> epochs,
                                       std::span<const double> ratios,
                                       const RunOptions& options = {},
                                       TeacherCache* cache = nullptr);

// Reads $PRUNELAB_THREADS (default 1).
std::size_t parallel_runs_limit();

}  // namespace prunelab

#endif  // PRUNELAB_PIPELINE_HPP_
