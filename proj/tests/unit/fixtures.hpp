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

// Small on-disk fixtures shared by the config, pipeline and CLI tests.

#ifndef PRUNELAB_TESTS_FIXTURES_HPP_
#define PRUNELAB_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "prunelab/dataset.hpp"

namespace prunelab::fixture {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("prunelab_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Writes a 3-class 4x4 IDX data set (bright quadrant = class) to `dir`.
inline void write_tiny_idx(const std::filesystem::path& dir, std::size_t train_n = 90,
                           std::size_t test_n = 30) {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> noise(0, 60);
  auto make = [&](std::size_t n, const std::string& stem) {
    std::vector<std::uint8_t> px, lb;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % 3);
      for (int r = 0; r < 4; ++r) {
        for (int col = 0; col < 4; ++col) {
          const int quadrant = (r / 2) * 2 + col / 2;
          px.push_back(static_cast<std::uint8_t>(noise(rng) + (quadrant == c ? 180 : 0)));
        }
      }
      lb.push_back(static_cast<std::uint8_t>(c));
    }
    write_file_bytes(dir / (stem + "-images"), encode_idx_images(n, 4, 4, px));
    write_file_bytes(dir / (stem + "-labels"), encode_idx_labels(lb));
  };
  make(train_n, "train");
  make(test_n, "test");
}

inline std::string tiny_idx_config(const std::string& pipeline, const std::string& extra = "") {
  return R"({
    "name": "tiny",
    "pipeline": ")" + pipeline + R"(",
    "network": {"input_dim": 16, "layer_widths": [12, 3]},
    "dataset": {"kind": "idx", "train_images": "train-images", "train_labels": "train-labels",
                "test_images": "test-images", "test_labels": "test-labels", "val_fraction": 0.1},
    "prune": {"ratio": 0.5, "prune_epoch": 2},
    "distill": {"temperature": 4.0, "alpha": 0.9},
    "optimizer": {"lr": 0.05, "batch_size": 16, "decay_every": 3, "decay_factor": 0.5},
    "epochs_teacher": 4,
    "epochs_student": 3,
    "seeds": [1, 2])" + extra + "\n}";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace prunelab::fixture

#endif  // PRUNELAB_TESTS_FIXTURES_HPP_
