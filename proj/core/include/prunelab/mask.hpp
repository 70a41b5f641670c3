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

#ifndef PRUNELAB_MASK_HPP_
#define PRUNELAB_MASK_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prunelab/matrix.hpp"

namespace prunelab {

// Binary keep/remove mask over one weight matrix, packed into 64-bit words.
// Bit (i % 64) of word (i / 64) is the flat row-major index i.
class LayerMask {
 public:
  LayerMask() = default;
  LayerMask(std::size_t rows, std::size_t cols, bool keep_all);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  std::size_t kept() const { return kept_; }

  bool keeps(std::size_t flat) const {
    return (words_[flat >> 6] >> (flat & 63)) & 1ULL;
  }
  bool keeps(std::size_t r, std::size_t c) const { return keeps(r * cols_ + c); }
  void set(std::size_t flat, bool keep);

  std::span<const std::uint64_t> words() const { return words_; }
  // Rebuilds from packed words; bits past size() must be zero.
  static LayerMask from_words(std::size_t rows, std::size_t cols,
                              std::vector<std::uint64_t> words);

  friend bool operator==(const LayerMask&, const LayerMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t kept_ = 0;
  std::vector<std::uint64_t> words_;
};

// One LayerMask per weight matrix, layer-major.
class MaskSet {
 public:
  MaskSet() = default;
  explicit MaskSet(std::vector<LayerMask> layers);

  static MaskSet all_ones(std::span<const Matrix> weights);
  static MaskSet all_zeros(std::span<const Matrix> weights);

  std::size_t layer_count() const { return layers_.size(); }
  const LayerMask& layer(std::size_t k) const { return layers_.at(k); }
  std::span<const LayerMask> layers() const { return layers_; }

  std::size_t total_kept() const;
  std::size_t total_size() const;

  // Throws kShapeMismatch unless every mask matches its weight matrix.
  void require_matches(std::span<const Matrix> weights) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;

 private:
  std::vector<LayerMask> layers_;
};

}  // namespace prunelab

#endif  // PRUNELAB_MASK_HPP_
