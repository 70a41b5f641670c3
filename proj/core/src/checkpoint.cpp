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

#include "prunelab/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <sstream>

#include "prunelab/dataset.hpp"
#include "prunelab/error.hpp"

namespace prunelab {
namespace {

enum Section : std::uint32_t {
  kSpec = 1,
  kEpoch = 2,
  kWeights = 3,
  kMasks = 4,
  kInitial = 5,
  kRng = 6,
  kOptimizer = 7,
};

constexpr char kMagic[4] = {'W', 'L', 'T', 'N'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void matrices(std::span<const Matrix> ms) {
    u32(static_cast<std::uint32_t>(ms.size()));
    for (const Matrix& m : ms) {
      u64(m.rows());
      u64(m.cols());
      for (double v : m.data()) f64(v);
    }
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<Matrix> matrices() {
    const std::uint32_t count = u32();
    std::vector<Matrix> ms;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint64_t rows = u64();
      const std::uint64_t cols = u64();
      if (cols != 0 && rows > remaining() / 8 / cols) {
        throw Error(ErrorCode::kTruncated, "checkpoint matrix exceeds section");
      }
      std::vector<double> data(rows * cols);
      for (double& v : data) v = f64();
      ms.emplace_back(rows, cols, std::move(data));
    }
    return ms;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_section(Writer& payload, Section tag, Writer& body) {
  payload.u32(tag);
  payload.u64(body.buffer().size());
  payload.bytes(body.buffer());
}

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

Checkpoint make_checkpoint(const Network& net, const OptimizerState* opt,
                           const std::mt19937_64* rng) {
  Checkpoint c;
  c.spec = net.spec;
  c.epoch = net.epoch;
  c.weights = net.weights;
  c.masks = net.masks;
  c.initial_weights = net.initial_weights;
  if (opt) c.optimizer = *opt;
  if (rng) {
    std::ostringstream os;
    os << *rng;
    c.rng_state = os.str();
  }
  return c;
}

Network restore_network(const Checkpoint& ckpt) {
  Network net;
  net.spec = ckpt.spec;
  net.weights = ckpt.weights;
  net.masks = ckpt.masks;
  net.initial_weights = ckpt.initial_weights;
  net.epoch = ckpt.epoch;
  return net;
}

bool restore_rng(const Checkpoint& ckpt, std::mt19937_64& rng) {
  if (!ckpt.rng_state) return false;
  std::istringstream is(*ckpt.rng_state);
  is >> rng;
  if (!is) throw Error(ErrorCode::kInvalidArgument, "checkpoint RNG state unreadable");
  return true;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer payload;
  {
    Writer s;
    s.u64(ckpt.spec.input_dim);
    s.u32(static_cast<std::uint32_t>(ckpt.spec.layer_widths.size()));
    for (std::size_t w : ckpt.spec.layer_widths) s.u64(w);
    s.u64(ckpt.spec.seed);
    s.u8(ckpt.spec.init == InitScheme::kHeNormal ? 0 : 1);
    s.u8(ckpt.spec.affine_input ? 1 : 0);
    write_section(payload, kSpec, s);
  }
  {
    Writer s;
    s.u64(ckpt.epoch);
    write_section(payload, kEpoch, s);
  }
  {
    Writer s;
    s.matrices(ckpt.weights);
    write_section(payload, kWeights, s);
  }
  if (ckpt.masks) {
    Writer s;
    s.u32(static_cast<std::uint32_t>(ckpt.masks->layer_count()));
    for (const LayerMask& m : ckpt.masks->layers()) {
      s.u64(m.rows());
      s.u64(m.cols());
      for (std::uint64_t w : m.words()) s.u64(w);
    }
    write_section(payload, kMasks, s);
  }
  if (ckpt.initial_weights) {
    Writer s;
    s.matrices(*ckpt.initial_weights);
    write_section(payload, kInitial, s);
  }
  if (ckpt.rng_state) {
    Writer s;
    s.u64(ckpt.rng_state->size());
    s.bytes({reinterpret_cast<const std::uint8_t*>(ckpt.rng_state->data()),
             ckpt.rng_state->size()});
    write_section(payload, kRng, s);
  }
  if (ckpt.optimizer) {
    const OptimizerState& o = *ckpt.optimizer;
    Writer s;
    s.f64(o.learning_rate);
    s.f64(o.momentum);
    s.f64(o.weight_decay);
    s.u64(o.epochs_done);
    s.u64(o.steps_done);
    s.u32(static_cast<std::uint32_t>(o.schedule.size()));
    for (const auto& step : o.schedule) {
      s.u64(step.epoch);
      s.f64(step.multiplier);
    }
    s.matrices(o.velocity);
    write_section(payload, kOptimizer, s);
  }

  Writer file;
  file.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  file.u32(kCheckpointVersion);
  file.u64(payload.buffer().size());
  file.bytes(payload.buffer());
  file.u32(crc32_of(payload.buffer()));
  return std::move(file.buffer());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a WLTN checkpoint");
  }
  Reader header(bytes.subspan(4));
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  const std::uint64_t payload_len = header.u64();
  if (header.remaining() < 4 || payload_len > header.remaining() - 4) {
    throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  }
  const auto payload = header.take(payload_len);
  const std::uint32_t stored_crc = header.u32();
  if (!header.done()) throw Error(ErrorCode::kInvalidArgument, "trailing bytes after checkpoint");
  if (crc32_of(payload) != stored_crc) {
    throw Error(ErrorCode::kChecksumMismatch, "checkpoint CRC mismatch");
  }

  Checkpoint c;
  bool have_spec = false, have_epoch = false, have_weights = false;
  std::uint32_t last_tag = 0;
  Reader sections(payload);
  while (!sections.done()) {
    const std::uint32_t tag = sections.u32();
    const std::uint64_t len = sections.u64();
    if (tag <= last_tag) throw Error(ErrorCode::kInvalidArgument, "checkpoint sections out of order");
    last_tag = tag;
    Reader s(sections.take(len));
    switch (tag) {
      case kSpec: {
        c.spec.input_dim = s.u64();
        const std::uint32_t depth = s.u32();
        c.spec.layer_widths.clear();
        for (std::uint32_t i = 0; i < depth; ++i) c.spec.layer_widths.push_back(s.u64());
        c.spec.seed = s.u64();
        c.spec.init = s.u8() == 0 ? InitScheme::kHeNormal : InitScheme::kUniformScaled;
        c.spec.affine_input = s.u8() != 0;
        have_spec = true;
        break;
      }
      case kEpoch:
        c.epoch = s.u64();
        have_epoch = true;
        break;
      case kWeights:
        c.weights = s.matrices();
        have_weights = true;
        break;
      case kMasks: {
        const std::uint32_t count = s.u32();
        std::vector<LayerMask> layers;
        for (std::uint32_t i = 0; i < count; ++i) {
          const std::uint64_t rows = s.u64();
          const std::uint64_t cols = s.u64();
          const std::uint64_t n_words = (rows * cols + 63) / 64;
          if (n_words > s.remaining() / 8) throw Error(ErrorCode::kTruncated, "mask truncated");
          std::vector<std::uint64_t> words(n_words);
          for (auto& w : words) w = s.u64();
          layers.push_back(LayerMask::from_words(rows, cols, std::move(words)));
        }
        c.masks = MaskSet(std::move(layers));
        break;
      }
      case kInitial:
        c.initial_weights = s.matrices();
        break;
      case kRng: {
        const std::uint64_t n = s.u64();
        const auto text = s.take(n);
        c.rng_state = std::string(text.begin(), text.end());
        break;
      }
      case kOptimizer: {
        OptimizerState o;
        o.learning_rate = s.f64();
        o.momentum = s.f64();
        o.weight_decay = s.f64();
        o.epochs_done = s.u64();
        o.steps_done = s.u64();
        const std::uint32_t n = s.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
          ScheduleStep step;
          step.epoch = s.u64();
          step.multiplier = s.f64();
          o.schedule.push_back(step);
        }
        o.velocity = s.matrices();
        c.optimizer = std::move(o);
        break;
      }
      default:
        throw Error(ErrorCode::kInvalidArgument, "unknown checkpoint section " + std::to_string(tag));
    }
    if (!s.done()) throw Error(ErrorCode::kInvalidArgument, "checkpoint section has trailing bytes");
  }
  if (!have_spec || !have_epoch || !have_weights) {
    throw Error(ErrorCode::kTruncated, "checkpoint is missing required sections");
  }
  c.spec.validate();
  if (c.weights.size() != c.spec.depth()) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint weights do not match its spec");
  }
  for (std::size_t k = 0; k < c.weights.size(); ++k) {
    if (c.weights[k].rows() != c.spec.layer_widths[k] || c.weights[k].cols() != c.spec.fan_in(k)) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint layer " + std::to_string(k) +
                                                 " has shape " + c.weights[k].shape_string());
    }
  }
  if (c.masks) c.masks->require_matches(c.weights);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace prunelab
