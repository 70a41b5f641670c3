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

#ifndef PRUNELAB_TAPE_HPP_
#define PRUNELAB_TAPE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "prunelab/matrix.hpp"

namespace prunelab {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

// Records a forward computation as a list of primitive operations and replays
// it in reverse to accumulate gradients. Intermediates are kept until the tape
// is destroyed.
class Tape {
 public:
  // Leaf that does not receive a gradient.
  Var constant(Matrix value);
  // Leaf whose gradient is returned by backward(), in registration order.
  Var parameter(Matrix value);

  Var matmul(Var a, Var b);
  // a * b^T; the layer form x W^T with samples as rows.
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var relu(Var x);
  Var scale(Var x, double factor);
  Var sum(Var x);
  Var mean(Var x);

  // Mean over rows of -log softmax(logits)[label].
  Var softmax_cross_entropy(Var logits, std::span<const int> labels);
  // Mean over all entries of (pred - target)^2.
  Var mean_squared_error(Var pred, const Matrix& target);
  // Mean over rows of KL(softmax(teacher/T) || softmax(logits/T)). The
  // teacher is a constant.
  Var soft_target_kl(Var logits, const Matrix& teacher_logits,
                     double temperature);

  const Matrix& value(Var v) const { return nodes_.at(v.index).value; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t parameter_count() const { return parameters_.size(); }

  // Gradients of the scalar `loss` with respect to every parameter.
  std::vector<Matrix> backward(Var loss) const;

 private:
  enum class Op {
    kLeaf,
    kMatMul,
    kMatMulNT,
    kAdd,
    kMul,
    kRelu,
    kScale,
    kSum,
    kMean,
    kSoftmaxCrossEntropy,
    kMeanSquaredError,
    kSoftTargetKl,
  };

  struct Node {
    Op op = Op::kLeaf;
    std::size_t a = 0;
    std::size_t b = 0;
    Matrix value;
    bool needs_grad = false;
    double factor = 0.0;
    // Per-op cached data: softmax probabilities, targets, label indices.
    Matrix aux;
    Matrix aux2;
    std::vector<int> labels;
  };

  Var push(Node node);
  const Node& node(Var v) const { return nodes_.at(v.index); }

  std::vector<Node> nodes_;
  std::vector<std::size_t> parameters_;
};

}  // namespace prunelab

#endif  // PRUNELAB_TAPE_HPP_
