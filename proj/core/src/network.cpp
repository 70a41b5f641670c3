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

#include "prunelab/network.hpp"

#include <algorithm>
#include <numeric>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void sgd_step(Network& net, const std::vector<Matrix>& grads, OptimizerState& opt) {
  const double lr = opt.rate_at(opt.epochs_done);
  if (opt.velocity.empty()) {
    for (const Matrix& w : net.weights) opt.velocity.emplace_back(w.rows(), w.cols());
  }
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    Matrix& w = net.weights[k];
    Matrix& v = opt.velocity[k];
    const Matrix& g = grads[k];
    const LayerMask* mask = net.masks ? &net.masks->layer(k) : nullptr;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask && !mask->keeps(i)) {
        v[i] = 0.0;
        w[i] = 0.0;
        continue;
      }
      v[i] = opt.momentum * v[i] + (g[i] + opt.weight_decay * w[i]);
      w[i] -= lr * v[i];
    }
  }
  ++opt.steps_done;
}

}  // namespace

std::string_view init_scheme_name(InitScheme s) {
  return s == InitScheme::kHeNormal ? "he-normal" : "uniform-scaled";
}

InitScheme parse_init_scheme(std::string_view name) {
  if (name == "he-normal") return InitScheme::kHeNormal;
  if (name == "uniform-scaled") return InitScheme::kUniformScaled;
  throw Error(ErrorCode::kConfig, "unknown init scheme '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind kind) {
  return kind == LossKind::kCrossEntropy ? "cross-entropy" : "mse";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "cross-entropy") return LossKind::kCrossEntropy;
  if (name == "mse") return LossKind::kMse;
  throw Error(ErrorCode::kConfig, "unknown loss '" + std::string(name) + "'");
}

void NetworkSpec::validate() const {
  if (input_dim == 0) throw Error(ErrorCode::kInvalidArgument, "input_dim must be >= 1");
  if (layer_widths.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "network needs at least one layer");
  }
  for (std::size_t w : layer_widths) {
    if (w == 0) throw Error(ErrorCode::kInvalidArgument, "layer widths must be >= 1");
  }
}

std::size_t NetworkSpec::fan_in(std::size_t k) const {
  if (k == 0) return input_dim + (affine_input ? 1 : 0);
  return layer_widths[k - 1];
}

std::size_t NetworkSpec::weight_count() const {
  std::size_t d = 0;
  for (std::size_t k = 0; k < layer_widths.size(); ++k) d += layer_widths[k] * fan_in(k);
  return d;
}

std::size_t NetworkSpec::unit_count() const {
  return std::accumulate(layer_widths.begin(), layer_widths.end(), std::size_t{0});
}

Network init_network(const NetworkSpec& spec) {
  spec.validate();
  Network net;
  net.spec = spec;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    const auto fan_in = static_cast<double>(spec.fan_in(k));
    Matrix w(spec.layer_widths[k], spec.fan_in(k));
    if (spec.init == InitScheme::kHeNormal) {
      const double sd = std::sqrt(2.0 / fan_in);
      for (double& v : w.data()) v = sd * normal(rng);
    } else {
      // Same variance as he-normal: U(-a, a) has variance a^2 / 3.
      const double a = std::sqrt(6.0 / fan_in);
      for (double& v : w.data()) v = a * uniform(rng);
    }
    net.weights.push_back(std::move(w));
  }
  net.initial_weights = net.weights;
  return net;
}

Matrix forward(const Network& net, const Matrix& batch) {
  if (batch.cols() != net.spec.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "forward: batch " + batch.shape_string() + " for input_dim " +
                    std::to_string(net.spec.input_dim));
  }
  Matrix h = net.spec.affine_input ? append_ones_column(batch) : batch;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    h = matmul_nt(h, net.weights[k]);
    if (k + 1 < net.weights.size()) h = relu(h);
  }
  return h;
}

Var forward(Tape& tape, std::span<const Var> weights, const NetworkSpec& spec,
            const Matrix& batch) {
  if (batch.cols() != spec.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "forward: batch " + batch.shape_string() + " for input_dim " +
                    std::to_string(spec.input_dim));
  }
  Var h = tape.constant(spec.affine_input ? append_ones_column(batch) : batch);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    h = tape.matmul_nt(h, weights[k]);
    if (k + 1 < weights.size()) h = tape.relu(h);
  }
  return h;
}

double OptimizerState::rate_at(std::size_t epoch) const {
  double rate = learning_rate;
  for (const auto& s : schedule) {
    if (s.epoch <= epoch) rate *= s.multiplier;
  }
  return rate;
}

void OptimizerState::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kConfig, "momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::kConfig, "weight decay must be >= 0");
}

OptimizerState make_optimizer(const Network& net, double learning_rate, double momentum,
                              double weight_decay, std::vector<ScheduleStep> schedule) {
  OptimizerState opt;
  opt.learning_rate = learning_rate;
  opt.momentum = momentum;
  opt.weight_decay = weight_decay;
  opt.schedule = std::move(schedule);
  opt.validate();
  for (const Matrix& w : net.weights) opt.velocity.emplace_back(w.rows(), w.cols());
  return opt;
}

std::vector<ScheduleStep> step_decay_schedule(std::size_t every, double factor,
                                              std::size_t horizon) {
  std::vector<ScheduleStep> steps;
  if (every == 0) return steps;
  for (std::size_t e = every; e < horizon; e += every) steps.push_back({e, factor});
  return steps;
}

std::size_t argmax_row(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

Var supervised_loss(Tape& tape, Var output, const Dataset& data,
                    std::span<const std::size_t> rows, LossKind loss) {
  if (loss == LossKind::kCrossEntropy) {
    if (!data.is_classification()) {
      throw Error(ErrorCode::kInvalidArgument, "cross-entropy needs labels");
    }
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) labels.push_back(data.labels[r]);
    return tape.softmax_cross_entropy(output, labels);
  }
  if (data.targets.empty()) throw Error(ErrorCode::kInvalidArgument, "mse needs targets");
  return tape.mean_squared_error(output, gather_rows(data.targets, rows));
}

EpochMetrics train_epoch_with(Network& net, const Dataset& data, OptimizerState& opt,
                              std::size_t batch_size, std::mt19937_64& rng,
                              const LossBuilder& loss) {
  if (data.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (net.masks) net.masks->require_matches(net.weights);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  EpochMetrics metrics;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    std::span<const std::size_t> rows(order.data() + start, end - start);

    Tape tape;
    std::vector<Var> params;
    params.reserve(net.weights.size());
    for (const Matrix& w : net.weights) params.push_back(tape.parameter(w));
    const Var out = forward(tape, params, net.spec, gather_rows(data.inputs, rows));
    const Var l = loss(tape, out, rows);
    const double value = tape.value(l)[0];
    if (!std::isfinite(value)) {
      throw DivergenceError(opt.steps_done,
                            "non-finite loss at step " + std::to_string(opt.steps_done));
    }
    sgd_step(net, tape.backward(l), opt);

    loss_sum += value * static_cast<double>(rows.size());
    if (data.is_classification()) {
      const Matrix& logits = tape.value(out);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (argmax_row(logits.row(i)) == static_cast<std::size_t>(data.labels[rows[i]])) {
          ++correct;
        }
      }
    }
    ++metrics.steps;
  }
  metrics.loss = loss_sum / static_cast<double>(data.size());
  if (data.is_classification()) {
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  }
  ++opt.epochs_done;
  ++net.epoch;
  return metrics;
}

EpochMetrics train_epoch(Network& net, const Dataset& data, OptimizerState& opt,
                         LossKind loss, std::size_t batch_size, std::mt19937_64& rng) {
  return train_epoch_with(
      net, data, opt, batch_size, rng,
      [&](Tape& tape, Var out, std::span<const std::size_t> rows) {
        return supervised_loss(tape, out, data, rows, loss);
      });
}

EvalResult evaluate(const Network& net, const Dataset& data, LossKind loss) {
  if (data.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty evaluation set");
  EvalResult result;
  const Matrix out = forward(net, data.inputs);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  Tape tape;
  const Var o = tape.constant(out);
  result.loss = tape.value(supervised_loss(tape, o, data, rows, loss))[0];
  if (data.is_classification()) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (argmax_row(out.row(i)) == static_cast<std::size_t>(data.labels[i])) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  }
  return result;
}

}  // namespace prunelab
