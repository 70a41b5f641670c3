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

#include "prunelab/distill.hpp"

#include <string>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Var blend(Tape& tape, Var soft, Var hard, double soft_weight, double hard_weight) {
  return tape.add(tape.scale(soft, soft_weight), tape.scale(hard, hard_weight));
}

}  // namespace

void DistillConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distillation temperature must be > 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distillation alpha must be in [0, 1]");
  }
  if (epochs == 0) throw Error(ErrorCode::kInvalidArgument, "distillation epochs must be >= 1");
}

Var kd_loss(Tape& tape, Var student_logits, const Matrix& teacher_logits,
            std::span<const int> labels, const DistillConfig& config) {
  if (!(config.temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distillation temperature must be > 0");
  }
  if (config.alpha == 0.0) return tape.softmax_cross_entropy(student_logits, labels);
  const double t2 = config.temperature * config.temperature;
  const Var kl = tape.soft_target_kl(student_logits, teacher_logits, config.temperature);
  if (config.alpha == 1.0) return tape.scale(kl, t2);
  const Var ce = tape.softmax_cross_entropy(student_logits, labels);
  return blend(tape, kl, ce, config.alpha * t2, 1.0 - config.alpha);
}

Var kd_loss_regression(Tape& tape, Var student_out, const Matrix& teacher_out,
                       const Matrix& targets, const DistillConfig& config) {
  if (config.alpha == 0.0) return tape.mean_squared_error(student_out, targets);
  const Var soft = tape.mean_squared_error(student_out, teacher_out);
  if (config.alpha == 1.0) return soft;
  const Var hard = tape.mean_squared_error(student_out, targets);
  return blend(tape, soft, hard, config.alpha, 1.0 - config.alpha);
}

EpochMetrics distill_epoch(Network& student, const Matrix& teacher_outputs,
                           const Dataset& data, OptimizerState& opt,
                           const DistillConfig& config, std::size_t batch_size,
                           std::mt19937_64& rng) {
  if (teacher_outputs.rows() != data.size() ||
      teacher_outputs.cols() != student.spec.output_dim()) {
    throw Error(ErrorCode::kShapeMismatch,
                "teacher outputs " + teacher_outputs.shape_string() +
                    " do not match data/student");
  }
  if (data.is_classification()) {
    return train_epoch_with(student, data, opt, batch_size, rng,
                            [&](Tape& tape, Var out, std::span<const std::size_t> rows) {
                              std::vector<int> labels;
                              labels.reserve(rows.size());
                              for (std::size_t r : rows) labels.push_back(data.labels[r]);
                              return kd_loss(tape, out, gather(teacher_outputs, rows), labels,
                                             config);
                            });
  }
  return train_epoch_with(student, data, opt, batch_size, rng,
                          [&](Tape& tape, Var out, std::span<const std::size_t> rows) {
                            return kd_loss_regression(tape, out, gather(teacher_outputs, rows),
                                                      gather(data.targets, rows), config);
                          });
}

DistillReport distill_train(Network& student, const Network& teacher, const Dataset& data,
                            OptimizerState& opt, const DistillConfig& config,
                            std::size_t batch_size, std::mt19937_64& rng,
                            const EpochCallback& on_epoch) {
  config.validate();
  if (student.spec.input_dim != teacher.spec.input_dim ||
      student.spec.output_dim() != teacher.spec.output_dim() ||
      student.spec.affine_input != teacher.spec.affine_input) {
    throw Error(ErrorCode::kShapeMismatch, "student and teacher dimensions differ");
  }
  const std::uint64_t before = checksum(teacher.weights);
  // Rows are evaluated independently, so precomputing gives the same logits
  // a per-batch teacher pass would.
  const Matrix teacher_outputs = forward(teacher, data.inputs);

  DistillReport report;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    report.epochs.push_back(
        distill_epoch(student, teacher_outputs, data, opt, config, batch_size, rng));
    if (on_epoch) on_epoch(student, report.epochs.back());
  }
  if (checksum(teacher.weights) != before) {
    throw Error(ErrorCode::kFrozenTeacherMutated, "teacher weights changed during distillation");
  }
  return report;
}

}  // namespace prunelab
