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

// Acceptance gate. Prints one PASS/FAIL line per criterion:
//
//   prunelab_acceptance                  runs criteria 1..9
//   prunelab_acceptance --criterion 5    runs only criterion 5
//
// Each criterion checks its own wall-clock budget; exceeding it is a failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "prunelab/checkpoint.hpp"
#include "prunelab/config.hpp"
#include "prunelab/dataset.hpp"
#include "prunelab/distill.hpp"
#include "prunelab/error.hpp"
#include "prunelab/metrics.hpp"
#include "prunelab/network.hpp"
#include "prunelab/pipeline.hpp"
#include "prunelab/pruning.hpp"
#include "prunelab/spectral.hpp"
#include "prunelab/tape.hpp"
#include "prunelab/text.hpp"

namespace prunelab {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Autodiff against central finite differences.

Outcome gradient_check() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> width(2, 6);
  double worst = 0.0;
  int nets = 0;
  for (int trial = 0; trial < 20; ++trial) {
    NetworkSpec spec;
    spec.input_dim = static_cast<std::size_t>(width(rng));
    const int depth = 1 + trial % 3;
    for (int k = 0; k < depth; ++k) spec.layer_widths.push_back(static_cast<std::size_t>(width(rng)));
    spec.seed = 1000 + static_cast<std::uint64_t>(trial);
    spec.init = trial % 2 ? InitScheme::kUniformScaled : InitScheme::kHeNormal;
    const Network net = init_network(spec);
    const std::size_t batch = 5;
    const Matrix x = oracle::random_matrix(batch, spec.input_dim, rng);
    const Matrix y = oracle::random_matrix(batch, spec.output_dim(), rng);
    const Matrix teacher = oracle::random_matrix(batch, spec.output_dim(), rng);
    std::vector<int> labels;
    for (std::size_t i = 0; i < batch; ++i) {
      labels.push_back(static_cast<int>(rng() % spec.output_dim()));
    }
    DistillConfig kd;
    kd.temperature = 2.0;
    kd.alpha = 0.6;
    // Cycle through the three training losses.
    auto loss_of = [&](Tape& t, Var out) {
      switch (trial % 3) {
        case 0:
          return t.mean_squared_error(out, y);
        case 1:
          return t.softmax_cross_entropy(out, labels);
        default:
          return kd_loss(t, out, teacher, labels, kd);
      }
    };
    auto build = [&](Tape& t, const std::vector<Matrix>& weights) {
      std::vector<Var> vars;
      for (const auto& w : weights) vars.push_back(t.parameter(w));
      return loss_of(t, forward(t, vars, spec, x));
    };
    Tape tape;
    const auto grads = tape.backward(build(tape, net.weights));
    const auto fd = oracle::finite_difference(net.weights, [&](const std::vector<Matrix>& w) {
      Tape t;
      return t.value(build(t, w))[0];
    });
    for (std::size_t k = 0; k < grads.size(); ++k) {
      const double scale = std::max({frobenius_norm(grads[k]), frobenius_norm(fd[k]), 1e-8});
      worst = std::max(worst, frobenius_norm(subtract(grads[k], fd[k])) / scale);
    }
    ++nets;
  }
  return {worst < 1e-5, std::to_string(nets) + " nets, max relative error " + fmt(worst, 3) +
                            " (limit 1e-05)"};
}

// ---------------------------------------------------------------------------
// 2. Pruning exact counts, magnitude dominance and sort-oracle agreement.

std::vector<double> flat_weights(const Network& net) {
  std::vector<double> flat;
  for (const auto& w : net.weights) flat.insert(flat.end(), w.data().begin(), w.data().end());
  return flat;
}

std::vector<bool> flat_keep(const MaskSet& m) {
  std::vector<bool> keep;
  for (const auto& layer : m.layers()) {
    for (std::size_t i = 0; i < layer.size(); ++i) keep.push_back(layer.keeps(i));
  }
  return keep;
}

Outcome pruning_exactness() {
  NetworkSpec spec;
  spec.input_dim = 100;
  spec.layer_widths = {80, 25};
  spec.seed = 7;
  const Network net = init_network(spec);
  const std::size_t d = spec.weight_count();
  bool ok = d == 10000;
  std::string why;
  for (double r : {0.5, 0.9, 0.95, 0.98}) {
    const auto expected = d - static_cast<std::size_t>(std::floor(r * static_cast<double>(d) + 1e-9));
    for (PruneScope scope : {PruneScope::kGlobal, PruneScope::kPerLayer}) {
      PruneRecipe recipe;
      recipe.ratio = r;
      recipe.scope = scope;
      const MaskSet m = select_magnitude(net, recipe);
      if (scope == PruneScope::kGlobal && m.total_kept() != expected) {
        ok = false;
        why += " global count r=" + fmt(r);
      }
      // Dominance: every kept |w| is >= every removed |w| in the pruning pool.
      for (std::size_t k = 0; k < m.layer_count(); ++k) {
        const LayerMask& lm = m.layer(k);
        if (scope == PruneScope::kPerLayer) {
          const std::size_t dk = lm.size();
          if (lm.kept() != dk - removed_count(r, dk)) {
            ok = false;
            why += " per-layer count";
          }
        }
      }
      double min_kept = INFINITY, max_removed = 0.0;
      std::vector<double> min_k(m.layer_count(), INFINITY), max_r(m.layer_count(), 0.0);
      for (std::size_t k = 0; k < m.layer_count(); ++k) {
        for (std::size_t i = 0; i < net.weights[k].size(); ++i) {
          const double a = std::abs(net.weights[k][i]);
          if (m.layer(k).keeps(i)) {
            min_kept = std::min(min_kept, a);
            min_k[k] = std::min(min_k[k], a);
          } else {
            max_removed = std::max(max_removed, a);
            max_r[k] = std::max(max_r[k], a);
          }
        }
      }
      if (scope == PruneScope::kGlobal && min_kept < max_removed) {
        ok = false;
        why += " dominance";
      }
      for (std::size_t k = 0; scope == PruneScope::kPerLayer && k < m.layer_count(); ++k) {
        if (min_k[k] < max_r[k]) {
          ok = false;
          why += " per-layer dominance";
        }
      }
    }
    PruneRecipe rnd;
    rnd.ratio = r;
    rnd.rule = PruneRule::kRandom;
    if (select_random(net, rnd, 99).total_kept() != expected) {
      ok = false;
      why += " random count";
    }
  }

  // Oracle agreement, with a share of nets whose weights are coarsely
  // quantized so that ties are common.
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> dim(1, 30);
  std::uniform_real_distribution<double> ratio(0.0, 0.99);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    NetworkSpec s;
    s.input_dim = static_cast<std::size_t>(dim(rng));
    for (int k = 0, depth = 1 + t % 3; k < depth; ++k) {
      s.layer_widths.push_back(static_cast<std::size_t>(dim(rng)));
    }
    s.seed = static_cast<std::uint64_t>(t);
    Network n = init_network(s);
    if (t % 4 == 0) {
      for (auto& w : n.weights) {
        for (double& v : w.data()) v = std::round(v * 2.0) / 2.0;
      }
    }
    PruneRecipe recipe;
    recipe.ratio = t % 10 == 0 ? 0.0 : ratio(rng);
    if (flat_keep(select_magnitude(n, recipe)) == oracle::sort_oracle_keep(flat_weights(n), recipe.ratio)) {
      ++agree;
    }
  }
  ok = ok && agree == 100;
  return {ok, "d=" + std::to_string(d) + ", ratios {0.5,0.9,0.95,0.98} exact and dominant" +
                  (why.empty() ? "" : " [broken:" + why + "]") + ", oracle agreement " +
                  std::to_string(agree) + "/100"};
}

// ---------------------------------------------------------------------------
// 3. Norm chain and spectral norms against the Jacobi SVD oracle.

Outcome norm_chain() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dim(2, 64);
  int holds = 0, total = 0;
  double worst_norm_err = 0.0;
  std::size_t largest = 0;
  for (int t = 0; t < 100; ++t) {
    NetworkSpec s;
    const int depth = 2 + t % 3;
    for (int k = 0; k < depth; ++k) s.layer_widths.push_back(static_cast<std::size_t>(dim(rng)));
    // The max-norm bound assumes d_0 <= (d_1 + ... + d_L) * d_L; see the README.
    const std::size_t cap = std::min<std::size_t>(64, s.unit_count() * s.output_dim());
    s.input_dim = 2 + rng() % (cap - 1);
    s.seed = static_cast<std::uint64_t>(t);
    s.init = t % 2 ? InitScheme::kUniformScaled : InitScheme::kHeNormal;
    const Network dense = init_network(s);
    PruneRecipe recipe;
    recipe.ratio = 0.9;
    recipe.rule = t % 2 ? PruneRule::kRandom : PruneRule::kMagnitude;
    const Network pruned = apply_mask(dense, select_mask(dense, recipe, 5));
    for (const Network* net : {&dense, &pruned}) {
      const NormReport r = compute_norm_report(*net);
      ++total;
      holds += r.chain_holds(1e-9);
      for (std::size_t k = 0; k < net->weights.size(); ++k) {
        const double ref = oracle::svd_norm(net->weights[k]);
        worst_norm_err = std::max(worst_norm_err, std::abs(r.layer_norms[k] - ref) / std::max(ref, 1e-300));
        largest = std::max(largest, std::max(net->weights[k].rows(), net->weights[k].cols()));
      }
      const double flow_ref = oracle::svd_norm(oracle::fold_product(net->weights));
      worst_norm_err =
          std::max(worst_norm_err, std::abs(r.flow_norm - flow_ref) / std::max(flow_ref, 1e-300));
    }
  }
  return {holds == total && worst_norm_err < 1e-6,
          "chain holds on " + std::to_string(holds) + "/" + std::to_string(total) +
              " nets (slack 1e-9), max relative spectral-norm error vs SVD " +
              fmt(worst_norm_err, 3) + " on matrices up to " + std::to_string(largest) + "x" +
              std::to_string(largest)};
}

// ---------------------------------------------------------------------------
// 4. DFT against the naive sum, Parseval and pure-tone bins.

Outcome dft_correctness() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist;
  double worst_dft = 0.0, worst_parseval = 0.0;
  for (std::size_t n = 8; n <= 2048; n *= 2) {
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> x(n);
      for (double& v : x) v = dist(rng);
      const Spectrum s = dft(x);
      const auto ref = oracle::naive_dft(x);
      for (std::size_t k = 0; k < ref.size(); ++k) {
        worst_dft = std::max(worst_dft, std::abs(s.amplitudes[k] - ref[k]));
      }
      double power = 0.0;
      for (double v : x) power += v * v;
      power /= static_cast<double>(n);
      worst_parseval = std::max(worst_parseval, std::abs(s.power() - power) / power);
    }
  }
  int tones = 0, peaks = 0;
  for (std::size_t n : {16, 256, 1024}) {
    for (std::size_t k0 = 0; k0 <= n / 2; k0 += (k0 < 8 ? 1 : n / 16)) {
      const double phase = std::uniform_real_distribution<double>(0.0, 6.28)(rng);
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = 1.7 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k0 * j) /
                                  static_cast<double>(n) + phase);
      }
      const Spectrum s = dft(x);
      std::size_t arg = 0;
      for (std::size_t k = 1; k < s.bins(); ++k) {
        if (std::abs(s.amplitudes[k]) > std::abs(s.amplitudes[arg])) arg = k;
      }
      ++tones;
      // At k = 0 and n/2 a cosine with phase pi/2 vanishes; those tones have
      // a nonzero real part here because the phase is drawn away from it.
      peaks += arg == k0;
    }
  }
  return {worst_dft < 1e-10 && worst_parseval < 1e-9 && peaks == tones,
          "max |fft - naive| " + fmt(worst_dft, 3) + " (limit 1e-10), Parseval " +
              fmt(worst_parseval, 3) + " (limit 1e-09), pure tones on the exact bin " +
              std::to_string(peaks) + "/" + std::to_string(tones)};
}

// ---------------------------------------------------------------------------
// 5. Low frequencies converge first.

Outcome frequency_order() {
  const ExperimentConfig c = load_preset("freq_desk");
  const ProbeConfig& probe = *c.probe;
  std::vector<double> ys;
  for (double x : probe.grid.points()) ys.push_back(multifreq_value(c.dataset.bands, c.dataset.lo, c.dataset.hi, x));
  const Spectrum target = dft(ys);
  const int bands[] = {1, 5};
  int ordered = 0;
  std::string hits;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DataSplits data = load_data(c, seed);
    NetworkSpec spec = c.network;
    spec.seed = seed;
    Network net = init_network(spec);
    const auto& o = c.teacher_optimizer;
    OptimizerState opt = make_optimizer(net, o.learning_rate, o.momentum, o.weight_decay, {});
    std::mt19937_64 rng(seed);
    std::vector<Spectrum> trace{network_spectrum(net, probe.grid)};
    for (std::size_t e = 0; e < c.epochs_teacher; ++e) {
      train_epoch(net, data.train, opt, c.loss, o.batch_size, rng);
      trace.push_back(network_spectrum(net, probe.grid));
    }
    const auto h = frequency_convergence(trace, target, bands, probe.delta);
    // Both bands must actually converge; a band that never converges does
    // not count as ordered.
    const bool ok = h[0].epoch && h[1].epoch && *h[0].epoch <= *h[1].epoch;
    ordered += ok;
    auto show = [](const BandHit& b) { return b.epoch ? std::to_string(*b.epoch) : std::string("-"); };
    hits += (hits.empty() ? "" : " ") + show(h[0]) + "/" + show(h[1]);
  }
  return {ordered >= 8, "hit(k=1) <= hit(k=5) in " + std::to_string(ordered) +
                            "/10 seeds (need 8); hit epochs k1/k5: " + hits};
}

// ---------------------------------------------------------------------------
// 6. Magnitude pruning perturbs the flow indicator less than random pruning.

ExperimentConfig desk_config(double ratio) {
  ExperimentConfig c = load_preset("wilton_desk");
  c.prune.ratio = ratio;
  c.track_norms = false;
  c.seeds = {1, 2, 3, 4, 5};
  return c;
}

Outcome stability_order() {
  ExperimentConfig c = desk_config(0.9);
  const std::size_t epochs = 5;
  std::vector<double> mag, rnd;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DataSplits data = load_data(c, seed);
    NetworkSpec spec = c.network;
    spec.seed = seed;
    Network net = init_network(spec);
    const auto& o = c.teacher_optimizer;
    OptimizerState opt = make_optimizer(net, o.learning_rate, o.momentum, o.weight_decay, {});
    std::mt19937_64 rng(seed);
    for (std::size_t e = 0; e < epochs; ++e) train_epoch(net, data.train, opt, c.loss, o.batch_size, rng);
    PruneRecipe recipe = c.prune;
    mag.push_back(pruning_stability(net, apply_mask(net, select_magnitude(net, recipe))).flow_drift);
    recipe.rule = PruneRule::kRandom;
    rnd.push_back(pruning_stability(net, apply_mask(net, select_random(net, recipe, seed + 100))).flow_drift);
  }
  const double mm = median(mag), mr = median(rnd);
  return {mm < mr, "removed 0.9 after " + std::to_string(epochs) +
                       " epochs, median flow_drift magnitude " + fmt(mm) + " < random " + fmt(mr) +
                       " over 10 seeds"};
}

// ---------------------------------------------------------------------------
// 7. Pipeline ordering at 95% removed.

Outcome pipeline_order() {
  ExperimentConfig c = desk_config(0.95);
  TeacherCache cache;
  std::map<Pipeline, double> med;
  std::string detail;
  for (Pipeline p : {Pipeline::kDenseBaseline, Pipeline::kWilton, Pipeline::kVanillaMbp,
                     Pipeline::kRandomPrune}) {
    c.pipeline = p;
    std::vector<double> accs;
    for (const auto& r : run_experiment(c, {}, &cache)) accs.push_back(r.final_test_acc);
    med[p] = median(accs);
    detail += (detail.empty() ? "" : ", ") + std::string(pipeline_name(p)) + " " + fmt(100.0 * med[p]);
  }
  const bool ok = med[Pipeline::kWilton] >= med[Pipeline::kVanillaMbp] &&
                  med[Pipeline::kVanillaMbp] >= med[Pipeline::kRandomPrune] &&
                  med[Pipeline::kDenseBaseline] >= med[Pipeline::kWilton];
  return {ok, "median test accuracy % over 5 seeds: " + detail +
                  " (need wilton >= vanilla-mbp >= random-prune, dense >= wilton)"};
}

// ---------------------------------------------------------------------------
// 8. Pruning mid-training is no worse than pruning at the end.

Outcome ablation_trend() {
  ExperimentConfig c = desk_config(0.9);
  const std::size_t epochs[] = {0, 10, 20, 30, 40};
  const double ratios[] = {0.9};
  const AblationTable t = run_ablation_prune_epoch(c, epochs, ratios);
  std::string detail;
  for (std::size_t e : epochs) {
    detail += (detail.empty() ? "" : ", ") + std::string("#") + std::to_string(e) + " " +
              fmt(100.0 * t.at(e, 0.9).median_test_acc);
  }
  const bool ok = t.at(20, 0.9).median_test_acc >= t.at(40, 0.9).median_test_acc;
  return {ok, "median test accuracy % by prune epoch: " + detail + " (need #20 >= #40)"};
}

// ---------------------------------------------------------------------------
// 9. Determinism and checkpoint persistence.

Outcome determinism() {
  ExperimentConfig c = load_preset("wilton_desk");
  c.dataset.train_limit = 1000;
  c.dataset.test_limit = 300;
  c.epochs_teacher = 4;
  c.epochs_student = 3;
  c.prune.prune_epoch = 2;
  c.seeds = {7};
  const fs::path root = fs::temp_directory_path() / ("prunelab_accept_" + std::to_string(::getpid()));
  bool csv_same = true, ckpt_same = true;
  for (Pipeline p : {Pipeline::kWilton, Pipeline::kLotteryTicket, Pipeline::kRandomPrune}) {
    c.pipeline = p;
    RunOptions a, b;
    a.out_dir = root / "a";
    b.out_dir = root / "b";
    const RunResult ra = run_pipeline(c, 7, a);
    const RunResult rb = run_pipeline(c, 7, b);
    const fs::path rel = std::string(pipeline_name(p)) + "-seed7";
    csv_same = csv_same && read_file_bytes(root / "a" / rel / "metrics.csv") ==
                               read_file_bytes(root / "b" / rel / "metrics.csv");
    for (const char* f : {"student_final.wltn", "teacher_final.wltn"}) {
      ckpt_same = ckpt_same && read_file_bytes(root / "a" / rel / f) == read_file_bytes(root / "b" / rel / f);
    }
  }

  // Round trip of a checkpoint carrying masks, initial weights, optimizer
  // state and RNG state.
  const Checkpoint saved = load_checkpoint(root / "a" / "wilton-seed7" / "student_final.wltn");
  const auto bytes = encode_checkpoint(saved);
  const Checkpoint back = decode_checkpoint(bytes);
  const bool complete = saved.masks && saved.optimizer && saved.rng_state && saved.initial_weights;
  const bool fields = back.weights == saved.weights && back.masks == saved.masks &&
                      back.initial_weights == saved.initial_weights &&
                      back.optimizer->velocity == saved.optimizer->velocity &&
                      back.optimizer->steps_done == saved.optimizer->steps_done &&
                      back.optimizer->epochs_done == saved.optimizer->epochs_done &&
                      back.rng_state == saved.rng_state && back.spec == saved.spec;
  const bool bitwise = encode_checkpoint(back) == bytes &&
                       bytes == read_file_bytes(root / "a" / "wilton-seed7" / "student_final.wltn");
  fs::remove_all(root);
  return {csv_same && ckpt_same && complete && fields && bitwise,
          std::string("metrics CSV identical across reruns: ") + (csv_same ? "yes" : "no") +
              ", checkpoints identical: " + (ckpt_same ? "yes" : "no") +
              ", round trip with masks+optimizer+rng bitwise: " +
              (complete && fields && bitwise ? "yes" : "no")};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "gradient correctness", 30, gradient_check},
      {2, "pruning exactness", 10, pruning_exactness},
      {3, "norm chain", 60, norm_chain},
      {4, "DFT correctness", 10, dft_correctness},
      {5, "frequency order", 600, frequency_order},
      {6, "stability order", 300, stability_order},
      {7, "pipeline order", 2700, pipeline_order},
      {8, "ablation trend", 3600, ablation_trend},
      {9, "determinism and persistence", 300, determinism},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= c.budget_seconds;
  const bool pass = o.pass && in_time;
  std::printf("CRITERION %d %s %s: %s; %.1fs of %.0fs budget%s\n", c.id, pass ? "PASS" : "FAIL",
              c.title, o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : " (over budget)");
  std::fflush(stdout);
  return pass;
}

}  // namespace
}  // namespace prunelab

int main(int argc, char** argv) {
  CLI::App app{"prunelab acceptance gate"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  bool all_pass = true;
  for (const auto& c : prunelab::criteria()) {
    if (only == 0 || only == c.id) all_pass = prunelab::run_one(c) && all_pass;
  }
  return all_pass ? 0 : 1;
}
