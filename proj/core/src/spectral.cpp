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

#include "prunelab/spectral.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

// Tighter than the spectral_norm defaults: the chain check compares norms
// to 1e-9 relative.
constexpr int kReportIters = 5000;
constexpr double kReportRelTol = 1e-14;

double precise_norm(const Matrix& m) {
  const double fro = frobenius_norm(m);
  if (fro == 0.0) return 0.0;
  return spectral_norm(m, kReportIters, kReportRelTol * fro).value;
}

void fft_in_place(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t m = 0; m < half; ++m) {
        // Twiddles evaluated directly; a running product drifts.
        const std::complex<double> w =
            std::polar(1.0, -2.0 * M_PI * static_cast<double>(m) / static_cast<double>(len));
        const std::complex<double> u = a[start + m];
        const std::complex<double> v = w * a[start + m + half];
        a[start + m] = u + v;
        a[start + m + half] = u - v;
      }
    }
  }
}

double product_of_norms(const Network& net) {
  double p = 1.0;
  for (const Matrix& w : net.weights) p *= precise_norm(w);
  return p;
}

}  // namespace

double Spectrum::power() const {
  double p = 0.0;
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    const double w = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    p += w * std::norm(amplitudes[k]);
  }
  return p;
}

Spectrum dft(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 8 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dft needs a power-of-two length >= 8, got " + std::to_string(n));
  }
  std::vector<std::complex<double>> a(samples.begin(), samples.end());
  fft_in_place(a);
  Spectrum s;
  s.n = n;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    s.frequencies.push_back(static_cast<int>(k));
    s.amplitudes.push_back(a[k] * inv);
  }
  return s;
}

Spectrum analytic_spectrum(const std::vector<FrequencyBand>& bands, std::size_t n) {
  if (n < 8 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::kInvalidArgument, "spectrum length must be a power of two >= 8");
  }
  Spectrum s;
  s.n = n;
  for (std::size_t k = 0; k <= n / 2; ++k) s.frequencies.push_back(static_cast<int>(k));
  s.amplitudes.assign(n / 2 + 1, {0.0, 0.0});
  for (const auto& b : bands) {
    if (b.k < 0 || static_cast<std::size_t>(b.k) > n / 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "band k=" + std::to_string(b.k) + " is not resolvable on " +
                      std::to_string(n) + " samples");
    }
    if (b.k == 0 || 2 * static_cast<std::size_t>(b.k) == n) {
      s.amplitudes[static_cast<std::size_t>(b.k)] += b.amplitude * std::sin(b.phase);
    } else {
      // a sin(t + phase) = a (e^{i(t+phase)} - e^{-i(t+phase)}) / 2i
      s.amplitudes[static_cast<std::size_t>(b.k)] +=
          std::complex<double>(0.0, -0.5 * b.amplitude) * std::polar(1.0, b.phase);
    }
  }
  return s;
}

Spectrum network_spectrum(const Network& net, const Grid1D& grid) {
  if (net.spec.input_dim != 1) {
    throw Error(ErrorCode::kInvalidArgument, "network_spectrum needs input_dim == 1, got " +
                                                 std::to_string(net.spec.input_dim));
  }
  if (net.spec.output_dim() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "network_spectrum needs a single output");
  }
  grid.validate();
  const std::vector<double> xs = grid.points();
  const Matrix out = forward(net, Matrix(grid.n, 1, xs));
  return dft(out.data());
}

double band_error(const Spectrum& fitted, const Spectrum& target, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= target.bins() ||
      static_cast<std::size_t>(k) >= fitted.bins()) {
    throw Error(ErrorCode::kInvalidArgument, "band k=" + std::to_string(k) + " out of range");
  }
  const auto i = static_cast<std::size_t>(k);
  return std::abs(fitted.amplitudes[i] - target.amplitudes[i]) /
         (std::abs(target.amplitudes[i]) + kBandEpsilon);
}

std::vector<BandHit> frequency_convergence(std::span<const Spectrum> trace,
                                           const Spectrum& target, std::span<const int> bands,
                                           double delta) {
  if (trace.empty()) throw Error(ErrorCode::kInvalidArgument, "empty spectrum trace");
  std::vector<BandHit> hits;
  for (int k : bands) {
    BandHit hit;
    hit.k = k;
    // Validates k against the target before looking at the trace.
    band_error(target, target, k);
    hit.target_zero = std::abs(target.amplitudes[static_cast<std::size_t>(k)]) == 0.0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
      if (band_error(trace[t], target, k) < delta) {
        hit.epoch = t;
        break;
      }
    }
    hits.push_back(hit);
  }
  return hits;
}

Matrix flow_indicator(const Network& net) {
  Matrix acc = net.weights.front();
  for (std::size_t k = 1; k < net.weights.size(); ++k) acc = matmul(net.weights[k], acc);
  return acc;
}

bool NormReport::chain_holds(double slack) const {
  return flow_norm <= norm_product * (1.0 + slack) &&
         norm_product <= max_norm_bound * (1.0 + slack);
}

NormReport compute_norm_report(const Network& net) {
  NormReport r;
  r.norm_product = 1.0;
  for (const Matrix& w : net.weights) {
    r.layer_norms.push_back(precise_norm(w));
    r.norm_product *= r.layer_norms.back();
    r.theta_max = std::max(r.theta_max, max_abs(w));
  }
  r.flow_norm = precise_norm(flow_indicator(net));
  r.unit_count = net.spec.unit_count();
  r.max_norm_bound = std::pow(r.theta_max, static_cast<double>(net.weights.size())) *
                     std::sqrt(static_cast<double>(r.unit_count));
  for (std::size_t width : net.spec.layer_widths) r.max_norm_bound *= static_cast<double>(width);
  return r;
}

NormReport norm_report(const Network& net) {
  NormReport r = compute_norm_report(net);
  if (!r.chain_holds()) {
    throw Error(ErrorCode::kNormChainViolation,
                "norm chain violated: flow " + std::to_string(r.flow_norm) + ", product " +
                    std::to_string(r.norm_product) + ", max-norm bound " +
                    std::to_string(r.max_norm_bound));
  }
  return r;
}

StabilityDrift pruning_stability(const Network& before, const Network& after) {
  if (before.weights.size() != after.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "pruning_stability: different depths");
  }
  for (std::size_t k = 0; k < before.weights.size(); ++k) {
    if (!before.weights[k].same_shape(after.weights[k])) {
      throw Error(ErrorCode::kShapeMismatch, "pruning_stability: layer " + std::to_string(k) +
                                                 " shapes differ");
    }
  }
  constexpr double kEps = 1e-12;
  const Matrix flow_before = flow_indicator(before);
  const Matrix flow_after = flow_indicator(after);
  StabilityDrift d;
  d.flow_drift =
      precise_norm(subtract(flow_before, flow_after)) / (precise_norm(flow_before) + kEps);
  const double pb = product_of_norms(before);
  const double pa = product_of_norms(after);
  d.bound_drift = std::abs(pb - pa) / (pb + kEps);
  return d;
}

}  // namespace prunelab
