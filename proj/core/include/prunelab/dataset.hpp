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

#ifndef PRUNELAB_DATASET_HPP_
#define PRUNELAB_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prunelab/grid.hpp"
#include "prunelab/matrix.hpp"

namespace prunelab {

enum class Split { kTrain, kVal, kTest };

// Samples are rows of `inputs`. Classification sets use `labels`;
// regression sets use `targets`.
struct Dataset {
  Matrix inputs;
  Matrix targets;
  std::vector<int> labels;
  int num_classes = 0;
  Split split = Split::kTrain;
  std::string provenance;

  std::size_t size() const { return inputs.rows(); }
  bool is_classification() const { return !labels.empty(); }
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Moves exactly floor(val_fraction * n) rows, chosen by a seeded shuffle, out
// of `train` into a validation set.
DataSplits split_validation(const Dataset& train, Dataset test,
                            double val_fraction, std::uint64_t seed);

// Keeps the first `limit` rows (all rows when limit is 0 or >= size).
Dataset take_first(const Dataset& data, std::size_t limit);

struct MultiFreqSpec {
  std::vector<FrequencyBand> bands;
  std::size_t n_samples = 256;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
};

// x ~ U[lo, hi) (seeded), y = sum of bands + N(0, noise_sd^2).
Dataset gen_multifreq(const MultiFreqSpec& spec);
// Noise-free samples of the same target on the grid points.
Dataset multifreq_on_grid(const std::vector<FrequencyBand>& bands, const Grid1D& grid);

// IDX ingestion (big-endian headers, magic 0x803 for images and 0x801 for
// labels). Pixels are scaled to [0, 1].
Dataset parse_idx(std::span<const std::uint8_t> image_bytes,
                  std::span<const std::uint8_t> label_bytes);
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

std::vector<std::uint8_t> encode_idx_images(std::size_t count, std::size_t rows,
                                            std::size_t cols,
                                            std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

// CSV with header "x,y" (regression) or "p0,...,pN,label" (classification).
std::string dataset_to_csv(const Dataset& data);

}  // namespace prunelab

#endif  // PRUNELAB_DATASET_HPP_
