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

#include "prunelab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

// Row-wise log-softmax of z / temperature.
Matrix log_softmax_rows(const Matrix& z, double temperature) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto in = z.row(r);
    auto dst = out.row(r);
    double peak = -INFINITY;
    for (double v : in) peak = std::max(peak, v / temperature);
    double total = 0.0;
    for (double v : in) total += std::exp(v / temperature - peak);
    const double lse = peak + std::log(total);
    for (std::size_t c = 0; c < in.size(); ++c) dst[c] = in[c] / temperature - lse;
  }
  return out;
}

Matrix exp_entries(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = std::exp(v);
  return out;
}

void accumulate(Matrix& into, const Matrix& delta) {
  if (into.empty()) {
    into = delta;
    return;
  }
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += delta[i];
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  Var v = push(std::move(n));
  parameters_.push_back(v.index);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatMul;
  n.a = a.index;
  n.b = b.index;
  n.value = prunelab::matmul(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
  Node n;
  n.op = Op::kMatMulNT;
  n.a = a.index;
  n.b = b.index;
  n.value = prunelab::matmul_nt(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::kAdd;
  n.a = a.index;
  n.b = b.index;
  n.value = prunelab::add(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  Node n;
  n.op = Op::kMul;
  n.a = a.index;
  n.b = b.index;
  n.value = hadamard(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::kRelu;
  n.a = x.index;
  n.value = prunelab::relu(value(x));
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  Node n;
  n.op = Op::kScale;
  n.a = x.index;
  n.factor = factor;
  n.value = prunelab::scale(value(x), factor);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  Node n;
  n.op = Op::kSum;
  n.a = x.index;
  double s = 0.0;
  for (double v : value(x).data()) s += v;
  n.value = Matrix(1, 1, s);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::mean(Var x) {
  const Matrix& in = value(x);
  if (in.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of empty matrix");
  Node n;
  n.op = Op::kMean;
  n.a = x.index;
  double s = 0.0;
  for (double v : in.data()) s += v;
  n.value = Matrix(1, 1, s / static_cast<double>(in.size()));
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& z = value(logits);
  if (labels.size() != z.rows() || z.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "softmax_cross_entropy: " + std::to_string(labels.size()) +
                    " labels for logits " + z.shape_string());
  }
  Node n;
  n.op = Op::kSoftmaxCrossEntropy;
  n.a = logits.index;
  const Matrix log_p = log_softmax_rows(z, 1.0);
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= z.cols()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(y) + " out of range");
    }
    total -= log_p(r, static_cast<std::size_t>(y));
  }
  n.value = Matrix(1, 1, total / static_cast<double>(z.rows()));
  n.aux = exp_entries(log_p);
  n.labels.assign(labels.begin(), labels.end());
  n.needs_grad = node(logits).needs_grad;
  return push(std::move(n));
}

Var Tape::mean_squared_error(Var pred, const Matrix& target) {
  const Matrix& p = value(pred);
  if (!p.same_shape(target) || p.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "mean_squared_error: " +
                                               p.shape_string() + " vs " +
                                               target.shape_string());
  }
  Node n;
  n.op = Op::kMeanSquaredError;
  n.a = pred.index;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - target[i];
    total += d * d;
  }
  n.value = Matrix(1, 1, total / static_cast<double>(p.size()));
  n.aux = target;
  n.needs_grad = node(pred).needs_grad;
  return push(std::move(n));
}

Var Tape::soft_target_kl(Var logits, const Matrix& teacher_logits,
                         double temperature) {
  const Matrix& z = value(logits);
  if (!z.same_shape(teacher_logits) || z.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "soft_target_kl: " +
                                               z.shape_string() + " vs " +
                                               teacher_logits.shape_string());
  }
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  }
  Node n;
  n.op = Op::kSoftTargetKl;
  n.a = logits.index;
  n.factor = temperature;
  const Matrix log_ps = log_softmax_rows(z, temperature);
  const Matrix log_pt = log_softmax_rows(teacher_logits, temperature);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double pt = std::exp(log_pt[i]);
    if (pt > 0.0) total += pt * (log_pt[i] - log_ps[i]);
  }
  n.value = Matrix(1, 1, total / static_cast<double>(z.rows()));
  n.aux = exp_entries(log_ps);
  n.aux2 = exp_entries(log_pt);
  n.needs_grad = node(logits).needs_grad;
  return push(std::move(n));
}

std::vector<Matrix> Tape::backward(Var loss) const {
  if (nodes_.empty()) throw Error(ErrorCode::kEmptyTape, "backward on empty tape");
  if (loss.index >= nodes_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "loss node not on this tape");
  }
  if (!nodes_[loss.index].value.is_scalar()) {
    throw Error(ErrorCode::kNotScalar,
                "loss must be 1x1, got " + nodes_[loss.index].value.shape_string());
  }

  std::vector<Matrix> grads(nodes_.size());
  grads[loss.index] = Matrix(1, 1, 1.0);

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.needs_grad || grads[i].empty()) continue;
    const Matrix& g = grads[i];
    auto wants = [&](std::size_t j) { return nodes_[j].needs_grad; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul:
        if (wants(n.a)) accumulate(grads[n.a], prunelab::matmul_nt(g, nodes_[n.b].value));
        if (wants(n.b)) accumulate(grads[n.b], matmul_tn(nodes_[n.a].value, g));
        break;
      case Op::kMatMulNT:
        if (wants(n.a)) accumulate(grads[n.a], prunelab::matmul(g, nodes_[n.b].value));
        if (wants(n.b)) accumulate(grads[n.b], matmul_tn(g, nodes_[n.a].value));
        break;
      case Op::kAdd:
        if (wants(n.a)) accumulate(grads[n.a], g);
        if (wants(n.b)) accumulate(grads[n.b], g);
        break;
      case Op::kMul:
        if (wants(n.a)) accumulate(grads[n.a], hadamard(g, nodes_[n.b].value));
        if (wants(n.b)) accumulate(grads[n.b], hadamard(g, nodes_[n.a].value));
        break;
      case Op::kRelu: {
        // Subgradient 0 at exactly 0.
        Matrix d = g;
        const Matrix& x = nodes_[n.a].value;
        for (std::size_t k = 0; k < d.size(); ++k) {
          if (!(x[k] > 0.0)) d[k] = 0.0;
        }
        accumulate(grads[n.a], d);
        break;
      }
      case Op::kScale:
        accumulate(grads[n.a], prunelab::scale(g, n.factor));
        break;
      case Op::kSum:
      case Op::kMean: {
        const Matrix& x = nodes_[n.a].value;
        double each = g[0];
        if (n.op == Op::kMean) each /= static_cast<double>(x.size());
        accumulate(grads[n.a], Matrix(x.rows(), x.cols(), each));
        break;
      }
      case Op::kSoftmaxCrossEntropy: {
        Matrix d = n.aux;
        const double w = g[0] / static_cast<double>(d.rows());
        for (std::size_t r = 0; r < d.rows(); ++r) {
          d(r, static_cast<std::size_t>(n.labels[r])) -= 1.0;
        }
        for (double& v : d.data()) v *= w;
        accumulate(grads[n.a], d);
        break;
      }
      case Op::kMeanSquaredError: {
        const Matrix& p = nodes_[n.a].value;
        Matrix d(p.rows(), p.cols());
        const double w = 2.0 * g[0] / static_cast<double>(p.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = w * (p[k] - n.aux[k]);
        accumulate(grads[n.a], d);
        break;
      }
      case Op::kSoftTargetKl: {
        // d/dz KL(pt || softmax(z/T)) = (ps - pt) / T per row.
        Matrix d(n.aux.rows(), n.aux.cols());
        const double w = g[0] / (n.factor * static_cast<double>(d.rows()));
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = w * (n.aux[k] - n.aux2[k]);
        accumulate(grads[n.a], d);
        break;
      }
    }
  }

  std::vector<Matrix> out;
  out.reserve(parameters_.size());
  for (std::size_t p : parameters_) {
    const Matrix& v = nodes_[p].value;
    out.push_back(grads[p].empty() ? Matrix(v.rows(), v.cols()) : std::move(grads[p]));
  }
  return out;
}

}  // namespace prunelab
