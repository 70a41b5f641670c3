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

#ifndef PRUNELAB_SPECTRAL_HPP_
#define PRUNELAB_SPECTRAL_HPP_

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "prunelab/grid.hpp"
#include "prunelab/matrix.hpp"
#include "prunelab/network.hpp"

namespace prunelab {

// One-sided spectrum of n real samples, normalized so a constant signal c has
// amplitude c at k = 0:  X_k = (1/n) sum_j x_j exp(-2 pi i j k / n), k <= n/2.
struct Spectrum {
  std::size_t n = 0;
  std::vector<int> frequencies;
  std::vector<std::complex<double>> amplitudes;

  std::size_t bins() const { return amplitudes.size(); }
  // sum_k w_k |X_k|^2 with w = 1 at k = 0 and k = n/2, 2 elsewhere. Equals
  // the mean square of the samples (Parseval).
  double power() const;
};

// Radix-2 FFT. n must be a power of two, >= 8.
Spectrum dft(std::span<const double> samples);

// Analytic spectrum of a sum of sinusoids sampled on an n-point grid.
Spectrum analytic_spectrum(const std::vector<FrequencyBand>& bands, std::size_t n);

// Spectrum of the scalar network output over the grid. Needs input_dim == 1
// and a single output.
Spectrum network_spectrum(const Network& net, const Grid1D& grid);

inline constexpr double kBandEpsilon = 1e-12;

// |f(k) - g(k)| / (|g(k)| + 1e-12).
double band_error(const Spectrum& fitted, const Spectrum& target, int k);

struct BandHit {
  int k = 0;
  std::optional<std::size_t> epoch;  // empty: never within delta
  bool target_zero = false;          // |g(k)| == 0, error is not relative
};

// First trace index at which each band's relative error drops below delta.
std::vector<BandHit> frequency_convergence(std::span<const Spectrum> trace,
                                           const Spectrum& target, std::span<const int> bands,
                                           double delta);

// W^L * ... * W^1, shape d_L x fan_in(0).
Matrix flow_indicator(const Network& net);

struct NormReport {
  std::vector<double> layer_norms;  // ||W^k||
  double norm_product = 0.0;        // prod ||W^k||
  double flow_norm = 0.0;           // ||W^L ... W^1||
  double theta_max = 0.0;           // max |w| over all weights
  std::size_t unit_count = 0;       // d = d_1 + ... + d_L
  double max_norm_bound = 0.0;      // theta_max^L sqrt(d) prod d_k

  // flow_norm <= norm_product <= max_norm_bound, each with `slack` relative
  // tolerance.
  bool chain_holds(double slack = 1e-9) const;
};

// Computes every field without checking the chain.
NormReport compute_norm_report(const Network& net);
// Same, but throws kNormChainViolation if the chain fails.
NormReport norm_report(const Network& net);

struct StabilityDrift {
  double flow_drift = 0.0;   // ||Wbar_b - Wbar_a|| / (||Wbar_b|| + eps)
  double bound_drift = 0.0;  // |P_b - P_a| / (P_b + eps), P = prod ||W^k||
};

StabilityDrift pruning_stability(const Network& before, const Network& after);

}  // namespace prunelab

#endif  // PRUNELAB_SPECTRAL_HPP_
