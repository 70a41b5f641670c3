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

#ifndef PRUNELAB_NETWORK_HPP_
#define PRUNELAB_NETWORK_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prunelab/dataset.hpp"
#include "prunelab/mask.hpp"
#include "prunelab/matrix.hpp"
#include "prunelab/tape.hpp"

namespace prunelab {

enum class InitScheme { kHeNormal, kUniformScaled };

std::string_view init_scheme_name(InitScheme s);
InitScheme parse_init_scheme(std::string_view name);

// Architecture of a bias-free ReLU multilayer perceptron.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> layer_widths;  // d_1..d_L; the last is the output width
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::kHeNormal;
  // Appends a constant 1.0 coordinate to every input. The first weight matrix
  // then has input_dim + 1 columns; the network is still a pure matrix chain.
  bool affine_input = false;

  void validate() const;
  std::size_t depth() const { return layer_widths.size(); }
  std::size_t output_dim() const { return layer_widths.back(); }
  // Columns of W^k (k is 0-based): d_{k-1}, plus one for the constant input.
  std::size_t fan_in(std::size_t k) const;
  // Number of weights; the denominator of the kept fraction.
  std::size_t weight_count() const;
  // Number of units d_1 + ... + d_L; the d under the square root of the
  // max-norm Lipschitz bound.
  std::size_t unit_count() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct Network {
  NetworkSpec spec;
  std::vector<Matrix> weights;  // W^k has shape d_k x fan_in(k)
  std::optional<MaskSet> masks;
  std::optional<std::vector<Matrix>> initial_weights;
  std::size_t epoch = 0;
};

// Draws weights from spec.seed and keeps a copy for rewinding.
Network init_network(const NetworkSpec& spec);

// Rows of `batch` are samples. ReLU after every layer but the last.
Matrix forward(const Network& net, const Matrix& batch);

// Records the same forward pass on a tape. `weights` are the tape handles of
// W^1..W^L.
Var forward(Tape& tape, std::span<const Var> weights, const NetworkSpec& spec,
            const Matrix& batch);

enum class LossKind { kCrossEntropy, kMse };

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct ScheduleStep {
  std::size_t epoch = 0;
  double multiplier = 1.0;
};

// SGD with heavy-ball momentum and L2 weight decay:
//   v <- momentum * v + (g + weight_decay * w);  w <- w - lr * v
struct OptimizerState {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<ScheduleStep> schedule;
  std::vector<Matrix> velocity;
  // Epochs completed under this optimizer; the schedule is relative to it.
  std::size_t epochs_done = 0;
  std::size_t steps_done = 0;

  // Base rate times every multiplier whose trigger epoch is <= epoch.
  double rate_at(std::size_t epoch) const;
  void validate() const;
};

OptimizerState make_optimizer(const Network& net, double learning_rate, double momentum,
                              double weight_decay, std::vector<ScheduleStep> schedule);

// Multipliers of `factor` at every `every` epochs up to `horizon`.
std::vector<ScheduleStep> step_decay_schedule(std::size_t every, double factor,
                                              std::size_t horizon);

struct EpochMetrics {
  double loss = 0.0;
  double accuracy = NAN;  // NaN for regression
  std::size_t steps = 0;
};

// Builds the scalar training loss of one minibatch. `rows` indexes the
// minibatch into the dataset.
using LossBuilder =
    std::function<Var(Tape& tape, Var output, std::span<const std::size_t> rows)>;

// One shuffled pass over `data` with a custom loss. After every step the
// masked-off coordinates are zero in the weights and in the optimizer state.
EpochMetrics train_epoch_with(Network& net, const Dataset& data, OptimizerState& opt,
                              std::size_t batch_size, std::mt19937_64& rng,
                              const LossBuilder& loss);

// Plain supervised epoch (cross-entropy on labels or MSE on targets). Uses the
// masks attached to `net`, if any.
EpochMetrics train_epoch(Network& net, const Dataset& data, OptimizerState& opt,
                         LossKind loss, std::size_t batch_size, std::mt19937_64& rng);

struct EvalResult {
  double loss = 0.0;
  double accuracy = NAN;  // NaN for regression
};

EvalResult evaluate(const Network& net, const Dataset& data, LossKind loss);

// Loss of `outputs` against the dataset rows; shared by training and eval.
Var supervised_loss(Tape& tape, Var output, const Dataset& data,
                    std::span<const std::size_t> rows, LossKind loss);

std::size_t argmax_row(std::span<const double> row);

}  // namespace prunelab

#endif  // PRUNELAB_NETWORK_HPP_
