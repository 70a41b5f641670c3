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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "prunelab/dataset.hpp"
#include "prunelab/matrix.hpp"
#include "prunelab/network.hpp"
#include "prunelab/pruning.hpp"
#include "prunelab/spectral.hpp"

namespace prunelab {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = dist(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

// Layer product of a 64-sample batch through the desk network's first layer.
void BM_DeskLayer(benchmark::State& state) {
  const Matrix x = random_matrix(64, 784, 3);
  const Matrix w = random_matrix(256, 784, 4);
  for (auto _ : state) benchmark::DoNotOptimize(matmul_nt(x, w));
}
BENCHMARK(BM_DeskLayer);

void BM_Dft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  for (double& v : x) v = dist(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dft(x));
}
BENCHMARK(BM_Dft)->RangeMultiplier(4)->Range(256, 4096);

void BM_SpectralNorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(a));
}
BENCHMARK(BM_SpectralNorm)->Arg(64)->Arg(256);

void BM_MagnitudeMask(benchmark::State& state) {
  NetworkSpec s;
  s.input_dim = 784;
  s.layer_widths = {256, 128, 10};
  s.seed = 7;
  const Network net = init_network(s);
  PruneRecipe r;
  r.ratio = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(select_magnitude(net, r));
}
BENCHMARK(BM_MagnitudeMask)->Unit(benchmark::kMillisecond);

void BM_TrainEpochRegression(benchmark::State& state) {
  const Dataset data = multifreq_on_grid({{1, 1.0, 0.0}, {3, 1.0, 0.0}, {5, 1.0, 0.0}},
                                         Grid1D{-1.0, 1.0, 256});
  NetworkSpec s;
  s.input_dim = 1;
  s.layer_widths = {64, 64, 1};
  s.affine_input = true;
  s.seed = 1;
  Network net = init_network(s);
  OptimizerState opt = make_optimizer(net, 0.01, 0.9, 0.0, {});
  std::mt19937_64 rng(1);
  for (auto _ : state) train_epoch(net, data, opt, LossKind::kMse, 32, rng);
}
BENCHMARK(BM_TrainEpochRegression)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace prunelab

BENCHMARK_MAIN();
