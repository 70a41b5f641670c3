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

#include "prunelab/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>

#include "prunelab/error.hpp"
#include "prunelab/text.hpp"

namespace prunelab {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

void Grid1D::validate() const {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "grid requires lo < hi");
  if (n < 8 || n > 4096 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid size must be a power of two in [8, 4096], got " + std::to_string(n));
  }
}

std::vector<double> Grid1D::points() const {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = point(i);
  return xs;
}

double multifreq_value(const std::vector<FrequencyBand>& bands, double lo, double hi,
                       double x) {
  const double t = (x - lo) / (hi - lo);
  double y = 0.0;
  for (const auto& b : bands) {
    y += b.amplitude * std::sin(2.0 * M_PI * b.k * t + b.phase);
  }
  return y;
}

void Dataset::validate() const {
  if (is_classification()) {
    if (labels.size() != inputs.rows()) {
      throw Error(ErrorCode::kCountMismatch,
                  std::to_string(inputs.rows()) + " inputs but " +
                      std::to_string(labels.size()) + " labels");
    }
  } else if (targets.rows() != inputs.rows()) {
    throw Error(ErrorCode::kCountMismatch,
                std::to_string(inputs.rows()) + " inputs but " +
                    std::to_string(targets.rows()) + " targets");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.split = split;
  out.provenance = provenance;
  out.inputs = Matrix(rows.size(), inputs.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = inputs.row(rows[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
  }
  if (is_classification()) {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
  } else if (!targets.empty()) {
    out.targets = Matrix(rows.size(), targets.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = targets.row(rows[i]);
      std::copy(src.begin(), src.end(), out.targets.row(i).begin());
    }
  }
  return out;
}

DataSplits split_validation(const Dataset& train, Dataset test, double val_fraction,
                            std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must be in [0, 1)");
  }
  const std::size_t n = train.size();
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  // Keep the original row order inside each split.
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  DataSplits s;
  s.train = train.subset(train_rows);
  s.train.split = Split::kTrain;
  s.val = train.subset(val_rows);
  s.val.split = Split::kVal;
  s.test = std::move(test);
  s.test.split = Split::kTest;
  return s;
}

Dataset take_first(const Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  std::vector<std::size_t> rows(limit);
  std::iota(rows.begin(), rows.end(), 0);
  return data.subset(rows);
}

Dataset gen_multifreq(const MultiFreqSpec& spec) {
  if (spec.bands.empty()) throw Error(ErrorCode::kInvalidArgument, "no frequency bands");
  if (spec.n_samples < 16) {
    throw Error(ErrorCode::kInvalidArgument, "multifreq needs at least 16 samples");
  }
  if (!(spec.lo < spec.hi) || spec.noise_sd < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad multifreq domain or noise");
  }
  std::set<int> seen;
  for (const auto& b : spec.bands) {
    if (!seen.insert(b.k).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate band k=" + std::to_string(b.k));
    }
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(spec.lo, spec.hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.inputs = Matrix(spec.n_samples, 1);
  d.targets = Matrix(spec.n_samples, 1);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const double x = uniform(rng);
    d.inputs[i] = x;
    d.targets[i] = multifreq_value(spec.bands, spec.lo, spec.hi, x);
  }
  if (spec.noise_sd > 0.0) {
    for (std::size_t i = 0; i < spec.n_samples; ++i) d.targets[i] += spec.noise_sd * noise(rng);
  }
  d.provenance = "multifreq seed=" + std::to_string(spec.seed);
  return d;
}

Dataset multifreq_on_grid(const std::vector<FrequencyBand>& bands, const Grid1D& grid) {
  grid.validate();
  Dataset d;
  d.inputs = Matrix(grid.n, 1);
  d.targets = Matrix(grid.n, 1);
  for (std::size_t i = 0; i < grid.n; ++i) {
    d.inputs[i] = grid.point(i);
    d.targets[i] = multifreq_value(bands, grid.lo, grid.hi, d.inputs[i]);
  }
  d.provenance = "multifreq grid n=" + std::to_string(grid.n);
  return d;
}

Dataset parse_idx(std::span<const std::uint8_t> image_bytes,
                  std::span<const std::uint8_t> label_bytes) {
  if (image_bytes.size() < 16) {
    throw Error(ErrorCode::kTruncated, "IDX image header truncated");
  }
  if (read_be32(image_bytes, 0) != kIdxImagesMagic) {
    throw Error(ErrorCode::kBadMagic, "IDX image magic mismatch");
  }
  if (label_bytes.size() < 8) {
    throw Error(ErrorCode::kTruncated, "IDX label header truncated");
  }
  if (read_be32(label_bytes, 0) != kIdxLabelsMagic) {
    throw Error(ErrorCode::kBadMagic, "IDX label magic mismatch");
  }
  const std::size_t count = read_be32(image_bytes, 4);
  const std::size_t rows = read_be32(image_bytes, 8);
  const std::size_t cols = read_be32(image_bytes, 12);
  const std::size_t label_count = read_be32(label_bytes, 4);
  const std::size_t pixels = rows * cols;
  if (pixels != 0 && count > (image_bytes.size() - 16) / pixels) {
    throw Error(ErrorCode::kTruncated, "IDX image payload truncated");
  }
  if (label_bytes.size() - 8 < label_count) {
    throw Error(ErrorCode::kTruncated, "IDX label payload truncated");
  }
  if (count != label_count) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(count) + " images but " +
                                               std::to_string(label_count) + " labels");
  }

  Dataset d;
  d.inputs = Matrix(count, pixels);
  for (std::size_t i = 0; i < count * pixels; ++i) {
    d.inputs[i] = static_cast<double>(image_bytes[16 + i]) / 255.0;
  }
  d.labels.resize(count);
  int max_label = -1;
  for (std::size_t i = 0; i < count; ++i) {
    d.labels[i] = label_bytes[8 + i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.num_classes = max_label + 1;
  d.provenance = "idx " + std::to_string(count) + "x" + std::to_string(rows) + "x" +
                 std::to_string(cols);
  return d;
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const auto images = read_file_bytes(images_path);
  const auto labels = read_file_bytes(labels_path);
  Dataset d = parse_idx(images, labels);
  d.provenance = images_path.filename().string();
  return d;
}

std::vector<std::uint8_t> encode_idx_images(std::size_t count, std::size_t rows,
                                            std::size_t cols,
                                            std::span<const std::uint8_t> pixels) {
  if (pixels.size() != count * rows * cols) {
    throw Error(ErrorCode::kCountMismatch, "pixel buffer does not match IDX dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + pixels.size());
  put_be32(out, kIdxImagesMagic);
  put_be32(out, static_cast<std::uint32_t>(count));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  if (data.is_classification()) {
    for (std::size_t c = 0; c < data.inputs.cols(); ++c) out += "p" + std::to_string(c) + ",";
    out += "label\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
      for (double v : data.inputs.row(r)) out += format_double(v) + ",";
      out += std::to_string(data.labels[r]) + "\n";
    }
    return out;
  }
  out += "x,y\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    out += format_double(data.inputs(r, 0)) + "," + format_double(data.targets(r, 0)) + "\n";
  }
  return out;
}

}  // namespace prunelab
