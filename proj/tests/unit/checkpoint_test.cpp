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

#include <filesystem>
#include <random>

#include "doctest.h"
#include "prunelab/checkpoint.hpp"
#include "prunelab/dataset.hpp"
#include "prunelab/error.hpp"
#include "prunelab/pruning.hpp"

namespace prunelab {
namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("prunelab_ckpt_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

Checkpoint full_checkpoint() {
  NetworkSpec s;
  s.input_dim = 5;
  s.layer_widths = {7, 3};
  s.seed = 11;
  Network net = init_network(s);
  PruneRecipe r;
  r.ratio = 0.6;
  net = apply_mask(net, select_magnitude(net, r));
  net.epoch = 12;
  OptimizerState opt = make_optimizer(net, 0.1, 0.9, 5e-4, step_decay_schedule(15, 0.1, 40));
  opt.velocity[0][2] = 0.125;
  opt.epochs_done = 3;
  opt.steps_done = 99;
  std::mt19937_64 rng(5);
  rng.discard(17);
  return make_checkpoint(net, &opt, &rng);
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a decode error");
  return ErrorCode::kIo;
}

TEST_CASE("save, load, save is byte-identical") {
  TempDir dir;
  const Checkpoint c = full_checkpoint();
  save_checkpoint(dir.path / "a.wltn", c);
  const Checkpoint back = load_checkpoint(dir.path / "a.wltn");
  save_checkpoint(dir.path / "b.wltn", back);
  CHECK(read_file_bytes(dir.path / "a.wltn") == read_file_bytes(dir.path / "b.wltn"));
}

TEST_CASE("round trip preserves every field") {
  const Checkpoint c = full_checkpoint();
  const Checkpoint d = decode_checkpoint(encode_checkpoint(c));
  CHECK(d.spec == c.spec);
  CHECK(d.epoch == 12);
  CHECK(d.weights == c.weights);
  REQUIRE(d.masks.has_value());
  CHECK(*d.masks == *c.masks);
  CHECK(d.masks->total_kept() == c.masks->total_kept());
  CHECK(*d.initial_weights == *c.initial_weights);
  REQUIRE(d.optimizer.has_value());
  CHECK(d.optimizer->velocity == c.optimizer->velocity);
  CHECK(d.optimizer->steps_done == 99);
  CHECK(d.optimizer->schedule.size() == c.optimizer->schedule.size());
  std::mt19937_64 a(0), b(5);
  b.discard(17);
  REQUIRE(restore_rng(d, a));
  CHECK(a() == b());
}

TEST_CASE("minimal checkpoint without optional sections") {
  NetworkSpec s;
  s.input_dim = 2;
  s.layer_widths = {1};
  Network net = init_network(s);
  net.initial_weights.reset();
  const Checkpoint d = decode_checkpoint(encode_checkpoint(make_checkpoint(net)));
  CHECK_FALSE(d.masks.has_value());
  CHECK_FALSE(d.optimizer.has_value());
  CHECK_FALSE(d.rng_state.has_value());
  std::mt19937_64 rng;
  CHECK_FALSE(restore_rng(d, rng));
}

TEST_CASE("corrupted and truncated files are rejected") {
  const auto bytes = encode_checkpoint(full_checkpoint());
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(decode_error(magic) == ErrorCode::kBadMagic);
  auto version = bytes;
  version[4] = 9;
  CHECK(decode_error(version) == ErrorCode::kVersionMismatch);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK(decode_error(flipped) == ErrorCode::kChecksumMismatch);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    CHECK(decode_error({bytes.begin(), bytes.begin() + static_cast<long>(cut)}) ==
          ErrorCode::kTruncated);
  }
}

TEST_CASE("restore gives a usable network") {
  const Checkpoint c = full_checkpoint();
  const Network n = restore_network(c);
  CHECK(n.weights == c.weights);
  CHECK(n.epoch == 12);
  CHECK(n.masks.has_value());
}

TEST_CASE("crc32 matches the standard check value") {
  const std::string s = "123456789";
  CHECK(crc32_of({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}) == 0xCBF43926u);
}

}  // namespace
}  // namespace prunelab
