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

#ifndef PRUNELAB_CHECKPOINT_HPP_
#define PRUNELAB_CHECKPOINT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "prunelab/mask.hpp"
#include "prunelab/matrix.hpp"
#include "prunelab/network.hpp"

namespace prunelab {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything needed to resume or fork a run.
//
// On disk (all integers and doubles little-endian):
//   "WLTN" | u32 version | u64 payload_len | payload | u32 crc32(payload)
// The payload is a sequence of sections, each u32 tag | u64 len | bytes:
//   1 spec       u64 input_dim, u32 L, u64 widths[L], u64 seed, u8 init,
//                u8 affine_input
//   2 epoch      u64
//   3 weights    u32 count, then per matrix u64 rows, u64 cols, f64[rows*cols]
//   4 masks      u32 count, then per layer u64 rows, u64 cols,
//                u64 words[ceil(rows*cols/64)]  (bit i%64 of word i/64)
//   5 initial    same layout as weights
//   6 rng        u64 len, mt19937_64 state in its standard text form
//   7 optimizer  f64 lr, f64 momentum, f64 weight_decay, u64 epochs_done,
//                u64 steps_done, u32 n, n x (u64 epoch, f64 multiplier),
//                then velocity in the weights layout
// Sections 4-7 are optional. Sections appear in tag order.
struct Checkpoint {
  NetworkSpec spec;
  std::size_t epoch = 0;
  std::vector<Matrix> weights;
  std::optional<MaskSet> masks;
  std::optional<std::vector<Matrix>> initial_weights;
  std::optional<std::string> rng_state;
  std::optional<OptimizerState> optimizer;
};

Checkpoint make_checkpoint(const Network& net, const OptimizerState* opt = nullptr,
                           const std::mt19937_64* rng = nullptr);
Network restore_network(const Checkpoint& ckpt);
// Restores `rng` from the checkpoint; false if it carries no RNG state.
bool restore_rng(const Checkpoint& ckpt, std::mt19937_64& rng);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws kBadMagic, kVersionMismatch, kTruncated or kChecksumMismatch.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace prunelab

#endif  // PRUNELAB_CHECKPOINT_HPP_
