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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "prunelab/distill.hpp"
#include "prunelab/error.hpp"
#include "prunelab/pruning.hpp"

namespace prunelab {
namespace {

Dataset blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.4);
  Dataset d;
  d.inputs = Matrix(n, 4);
  d.num_classes = 3;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < 4; ++j) d.inputs(i, j) = (static_cast<int>(j) == c) + noise(rng);
    d.labels.push_back(c);
  }
  return d;
}

Network make_net(std::uint64_t seed) {
  NetworkSpec s;
  s.input_dim = 4;
  s.layer_widths = {12, 3};
  s.seed = seed;
  return init_network(s);
}

TEST_CASE("alpha 0 reduces to plain cross entropy bitwise") {
  std::mt19937_64 rng(1);
  const Matrix z = oracle::random_matrix(5, 3, rng);
  const Matrix t = oracle::random_matrix(5, 3, rng);
  const std::vector<int> labels{0, 1, 2, 1, 0};
  DistillConfig cfg;
  cfg.alpha = 0.0;
  Tape a;
  const double kd = a.value(kd_loss(a, a.parameter(z), t, labels, cfg))[0];
  Tape b;
  const double ce = b.value(b.softmax_cross_entropy(b.parameter(z), labels))[0];
  CHECK(kd == ce);
}

TEST_CASE("identical logits with alpha 1 give zero KL") {
  std::mt19937_64 rng(2);
  const Matrix z = oracle::random_matrix(4, 5, rng);
  DistillConfig cfg;
  cfg.alpha = 1.0;
  const std::vector<int> labels{0, 1, 2, 3};
  Tape t;
  CHECK(std::abs(t.value(kd_loss(t, t.parameter(z), z, labels, cfg))[0]) < 1e-12);
}

TEST_CASE("two-class hand computation at T = 1") {
  // student logits (0, 1), teacher logits (1, 0), label 1, alpha 0.5.
  const double ps1 = 1.0 / (1.0 + std::exp(-1.0));
  const double ps0 = 1.0 - ps1;
  const double pt0 = ps1, pt1 = ps0;
  const double kl = pt0 * std::log(pt0 / ps0) + pt1 * std::log(pt1 / ps1);
  const double ce = -std::log(ps1);
  const double expected = 0.5 * kl + 0.5 * ce;
  DistillConfig cfg;
  cfg.temperature = 1.0;
  cfg.alpha = 0.5;
  const std::vector<int> labels{1};
  Tape t;
  const double got =
      t.value(kd_loss(t, t.parameter(Matrix{{0, 1}}), Matrix{{1, 0}}, labels, cfg))[0];
  CHECK(std::abs(got - expected) < 1e-10);
}

TEST_CASE("kd loss gradient matches finite differences") {
  std::mt19937_64 rng(3);
  const Matrix z0 = oracle::random_matrix(6, 3, rng);
  const Matrix teacher = oracle::random_matrix(6, 3, rng);
  const std::vector<int> labels{0, 2, 1, 1, 0, 2};
  DistillConfig cfg;
  auto f = [&](const std::vector<Matrix>& p) {
    Tape t;
    return t.value(kd_loss(t, t.parameter(p[0]), teacher, labels, cfg))[0];
  };
  Tape t;
  const auto g = t.backward(kd_loss(t, t.parameter(z0), teacher, labels, cfg));
  const auto fd = oracle::finite_difference({z0}, f);
  CHECK(frobenius_norm(subtract(g[0], fd[0])) < 1e-6 * frobenius_norm(fd[0]));
}

TEST_CASE("alpha 0 distillation equals plain training bitwise") {
  const Dataset data = blobs(45, 4);
  const Network teacher = make_net(100);
  PruneRecipe r;
  r.ratio = 0.5;
  const Network base = make_net(7);
  Network a = apply_mask(base, select_magnitude(base, r));
  Network b = a;
  OptimizerState oa = make_optimizer(a, 0.05, 0.9, 5e-4, {});
  OptimizerState ob = make_optimizer(b, 0.05, 0.9, 5e-4, {});
  std::mt19937_64 ra(9), rb(9);
  DistillConfig cfg;
  cfg.alpha = 0.0;
  cfg.epochs = 3;
  distill_train(a, teacher, data, oa, cfg, 8, ra);
  for (int e = 0; e < 3; ++e) train_epoch(b, data, ob, LossKind::kCrossEntropy, 8, rb);
  CHECK(a.weights == b.weights);
}

TEST_CASE("teacher is unchanged and callbacks fire per epoch") {
  const Dataset data = blobs(30, 5);
  const Network teacher = make_net(1);
  const auto before = checksum(teacher.weights);
  Network student = make_net(2);
  OptimizerState opt = make_optimizer(student, 0.05, 0.9, 0.0, {});
  std::mt19937_64 rng(1);
  DistillConfig cfg;
  cfg.epochs = 4;
  int calls = 0;
  const DistillReport rep = distill_train(student, teacher, data, opt, cfg, 10, rng,
                                          [&](const Network& s, const EpochMetrics&) {
                                            ++calls;
                                            CHECK(s.epoch == static_cast<std::size_t>(calls));
                                          });
  CHECK(calls == 4);
  CHECK(rep.epochs.size() == 4);
  CHECK(checksum(teacher.weights) == before);
}

TEST_CASE("shape mismatch between teacher and student is rejected") {
  const Dataset data = blobs(30, 6);
  NetworkSpec s;
  s.input_dim = 4;
  s.layer_widths = {5, 2};
  const Network teacher = init_network(s);
  Network student = make_net(2);
  OptimizerState opt = make_optimizer(student, 0.05, 0.9, 0.0, {});
  std::mt19937_64 rng(1);
  try {
    distill_train(student, teacher, data, opt, DistillConfig{}, 10, rng);
    FAIL("expected kShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("regression blend is alpha-weighted mean squared error") {
  const Matrix s{{1.0}, {2.0}};
  const Matrix t{{0.0}, {2.0}};
  const Matrix y{{1.0}, {0.0}};
  DistillConfig cfg;
  cfg.alpha = 0.25;
  Tape tape;
  const double got = tape.value(kd_loss_regression(tape, tape.parameter(s), t, y, cfg))[0];
  Tape a, b;
  const double mt = a.value(a.mean_squared_error(a.parameter(s), t))[0];
  const double my = b.value(b.mean_squared_error(b.parameter(s), y))[0];
  CHECK(got == doctest::Approx(0.25 * mt + 0.75 * my));
}

TEST_CASE("distill config validation") {
  DistillConfig c;
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = DistillConfig{};
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
}

}  // namespace
}  // namespace prunelab
