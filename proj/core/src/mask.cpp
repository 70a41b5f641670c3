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

#include "prunelab/mask.hpp"

#include <bit>
#include <string>

#include "prunelab/error.hpp"

namespace prunelab {

LayerMask::LayerMask(std::size_t rows, std::size_t cols, bool keep_all)
    : rows_(rows), cols_(cols), words_((rows * cols + 63) / 64, 0) {
  if (keep_all) {
    for (std::size_t i = 0; i < size(); ++i) set(i, true);
  }
}

void LayerMask::set(std::size_t flat, bool keep) {
  const std::uint64_t bit = 1ULL << (flat & 63);
  std::uint64_t& word = words_[flat >> 6];
  const bool was = (word & bit) != 0;
  if (was == keep) return;
  if (keep) {
    word |= bit;
    ++kept_;
  } else {
    word &= ~bit;
    --kept_;
  }
}

LayerMask LayerMask::from_words(std::size_t rows, std::size_t cols,
                                std::vector<std::uint64_t> words) {
  LayerMask m;
  m.rows_ = rows;
  m.cols_ = cols;
  const std::size_t n = rows * cols;
  if (words.size() != (n + 63) / 64) {
    throw Error(ErrorCode::kShapeMismatch,
                "mask word count " + std::to_string(words.size()) +
                    " does not fit " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
  if (n % 64 != 0 && (words.back() >> (n % 64)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask has bits past its size");
  }
  m.words_ = std::move(words);
  for (std::uint64_t w : m.words_) m.kept_ += static_cast<std::size_t>(std::popcount(w));
  return m;
}

MaskSet::MaskSet(std::vector<LayerMask> layers) : layers_(std::move(layers)) {}

MaskSet MaskSet::all_ones(std::span<const Matrix> weights) {
  std::vector<LayerMask> layers;
  for (const Matrix& w : weights) layers.emplace_back(w.rows(), w.cols(), true);
  return MaskSet(std::move(layers));
}

MaskSet MaskSet::all_zeros(std::span<const Matrix> weights) {
  std::vector<LayerMask> layers;
  for (const Matrix& w : weights) layers.emplace_back(w.rows(), w.cols(), false);
  return MaskSet(std::move(layers));
}

std::size_t MaskSet::total_kept() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.kept();
  return n;
}

std::size_t MaskSet::total_size() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.size();
  return n;
}

void MaskSet::require_matches(std::span<const Matrix> weights) const {
  if (weights.size() != layers_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "mask has " + std::to_string(layers_.size()) + " layers, network has " +
                    std::to_string(weights.size()));
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != layers_[k].rows() || weights[k].cols() != layers_[k].cols()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "mask layer " + std::to_string(k) + " does not match weight " +
                      weights[k].shape_string());
    }
  }
}

}  // namespace prunelab
