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

#include "prunelab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": shapes " +
                                               a.shape_string() + " and " +
                                               b.shape_string() + " differ");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch,
                "matrix data length " + std::to_string(data_.size()) +
                    " does not match " + shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kShapeMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

// The kernels below skip zero multiplicands. The accumulator starts at +0.0
// and can never become -0.0, so dropping a +/-0 term leaves the result
// bitwise unchanged; sparse inputs (pixels, pruned weights, dead ReLUs) get
// cheaper.

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul: " + a.shape_string() +
                                               " x " + b.shape_string());
  }
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  Matrix c(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* out = c.data().data() + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = a(i, k);
      if (s == 0.0) continue;
      const double* in = b.data().data() + k * m;
      for (std::size_t j = 0; j < m; ++j) out[j] += s * in[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul_nt: " + a.shape_string() +
                                               " x (" + b.shape_string() +
                                               ")^T");
  }
  return matmul(a, transpose(b));
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul_tn: (" + a.shape_string() +
                                               ")^T x " + b.shape_string());
  }
  const std::size_t n = a.cols(), inner = a.rows(), m = b.cols();
  Matrix c(n, m);
  for (std::size_t k = 0; k < inner; ++k) {
    const double* in = b.data().data() + k * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = a(k, i);
      if (s == 0.0) continue;
      double* out = c.data().data() + i * m;
      for (std::size_t j = 0; j < m; ++j) out[j] += s * in[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
  return c;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix c = a;
  for (double& v : c.data()) v *= factor;
  return c;
}

Matrix append_ones_column(const Matrix& x) {
  Matrix y(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.row(r);
    auto dst = y.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst.back() = 1.0;
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](double v) { return std::isfinite(v); });
}

SpectralNormResult spectral_norm(const Matrix& a, int max_iters, double tol) {
  if (a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "spectral_norm: empty matrix");
  }
  if (max_iters < 1 || !(tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "spectral_norm: max_iters must be >= 1 and tol > 0");
  }
  if (max_abs(a) == 0.0) return {0.0, true, 0};

  const std::size_t n = a.cols();
  std::mt19937_64 rng(0x5eed5eed5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> perturb(n);
  double pn = 0.0;
  for (double& p : perturb) {
    p = normal(rng);
    pn += p * p;
  }
  pn = std::sqrt(pn);
  Matrix v(n, 1);
  const double base = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) v[i] = base + 0.1 * perturb[i] / pn;

  auto normalize = [](Matrix& x) {
    const double norm = frobenius_norm(x);
    if (norm > 0.0) {
      for (double& e : x.data()) e /= norm;
    }
    return norm;
  };
  normalize(v);

  SpectralNormResult result;
  double previous = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Matrix av = matmul(a, v);
    const double estimate = frobenius_norm(av);
    result.value = estimate;
    result.iterations = it;
    if (previous >= 0.0 && std::abs(estimate - previous) < tol) {
      result.converged = true;
      break;
    }
    previous = estimate;
    v = matmul_tn(a, av);
    if (normalize(v) == 0.0) {
      // Start vector landed in the null space; nothing more to learn.
      result.converged = true;
      break;
    }
  }
  return result;
}

std::uint64_t checksum(std::span<const Matrix> matrices) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Matrix& m : matrices) {
    const std::uint64_t dims[2] = {m.rows(), m.cols()};
    mix(dims, sizeof(dims));
    mix(m.data().data(), m.size() * sizeof(double));
  }
  return h;
}

}  // namespace prunelab
