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

#ifndef PRUNELAB_DISTILL_HPP_
#define PRUNELAB_DISTILL_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "prunelab/network.hpp"
#include "prunelab/tape.hpp"

namespace prunelab {

struct DistillConfig {
  double temperature = 4.0;
  // Weight on the distillation term; 1 - alpha goes to the hard-label loss.
  double alpha = 0.9;
  std::size_t epochs = 40;

  void validate() const;
};

// alpha * T^2 * KL(softmax(teacher/T) || softmax(student/T))
//   + (1 - alpha) * cross_entropy(labels, student).
// The endpoints alpha = 0 and alpha = 1 record only the surviving term.
Var kd_loss(Tape& tape, Var student_logits, const Matrix& teacher_logits,
            std::span<const int> labels, const DistillConfig& config);

// Regression form: alpha * mse(student, teacher) + (1 - alpha) * mse(student, y).
Var kd_loss_regression(Tape& tape, Var student_out, const Matrix& teacher_out,
                       const Matrix& targets, const DistillConfig& config);

// One distillation epoch. `teacher_outputs` holds forward(teacher, data.inputs).
EpochMetrics distill_epoch(Network& student, const Matrix& teacher_outputs,
                           const Dataset& data, OptimizerState& opt,
                           const DistillConfig& config, std::size_t batch_size,
                           std::mt19937_64& rng);

struct DistillReport {
  std::vector<EpochMetrics> epochs;
};

using EpochCallback = std::function<void(const Network& student, const EpochMetrics&)>;

// Trains `student` for config.epochs against the frozen teacher. Throws
// kFrozenTeacherMutated if the teacher's checksum changes.
DistillReport distill_train(Network& student, const Network& teacher, const Dataset& data,
                            OptimizerState& opt, const DistillConfig& config,
                            std::size_t batch_size, std::mt19937_64& rng,
                            const EpochCallback& on_epoch = {});

}  // namespace prunelab

#endif  // PRUNELAB_DISTILL_HPP_
