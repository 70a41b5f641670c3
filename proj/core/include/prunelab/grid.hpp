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

#ifndef PRUNELAB_GRID_HPP_
#define PRUNELAB_GRID_HPP_

#include <cstddef>
#include <vector>

namespace prunelab {

// Uniform half-open sampling grid x_i = lo + i * (hi - lo) / n, i < n.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 256;

  // Requires lo < hi and n a power of two in [8, 4096].
  void validate() const;
  double point(std::size_t i) const {
    return lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(n);
  }
  std::vector<double> points() const;
};

// One sinusoid a * sin(2*pi*k*(x - lo)/(hi - lo) + phase).
struct FrequencyBand {
  int k = 1;
  double amplitude = 1.0;
  double phase = 0.0;
};

double multifreq_value(const std::vector<FrequencyBand>& bands, double lo,
                       double hi, double x);

}  // namespace prunelab

#endif  // PRUNELAB_GRID_HPP_
