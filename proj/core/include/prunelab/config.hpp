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

#ifndef PRUNELAB_CONFIG_HPP_
#define PRUNELAB_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prunelab/dataset.hpp"
#include "prunelab/distill.hpp"
#include "prunelab/grid.hpp"
#include "prunelab/network.hpp"
#include "prunelab/pruning.hpp"

namespace prunelab {

enum class Pipeline { kWilton, kVanillaMbp, kLotteryTicket, kRandomPrune, kDenseBaseline };

std::string_view pipeline_name(Pipeline p);
Pipeline parse_pipeline(std::string_view name);
bool pipeline_prunes(Pipeline p);

struct DatasetConfig {
  enum class Kind { kIdx, kMultiFreq };
  Kind kind = Kind::kIdx;

  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::size_t train_limit = 0;  // 0 keeps every row
  std::size_t test_limit = 0;

  std::vector<FrequencyBand> bands;
  // Training inputs: uniform draws, or the probe grid points when on_grid.
  bool on_grid = false;
  std::size_t n_samples = 256;
  std::size_t test_samples = 256;
  double noise_sd = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  double val_fraction = 0.1;
};

struct OptimizerConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::size_t decay_every = 15;  // 0 disables step decay
  double decay_factor = 0.1;
};

struct ProbeConfig {
  Grid1D grid;
  std::vector<int> bands;
  double delta = 0.1;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Pipeline pipeline = Pipeline::kWilton;
  NetworkSpec network;
  DatasetConfig dataset;
  PruneRecipe prune;
  DistillConfig distill;
  OptimizerConfig teacher_optimizer;
  OptimizerConfig student_optimizer;
  LossKind loss = LossKind::kCrossEntropy;
  std::size_t epochs_teacher = 40;
  std::size_t epochs_student = 40;
  std::vector<std::uint64_t> seeds{1};
  std::optional<ProbeConfig> probe;
  // Per-epoch spectral-norm metrics (norm_product, flow_norm, flow_drift).
  bool track_norms = true;
  // Input checkpoint for the `spectrum` and `prune` subcommands.
  std::optional<std::filesystem::path> checkpoint;

  // Total validation; throws kConfig on the first problem found.
  void validate() const;
};

// Parses JSON text. Unknown keys are errors. Relative paths resolve against
// `base_dir`.
ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Presets live in $PRUNELAB_PRESET_DIR (default: the source tree's presets/).
std::filesystem::path preset_dir();
ExperimentConfig load_preset(std::string_view name);

DataSplits load_data(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace prunelab

#endif  // PRUNELAB_CONFIG_HPP_
