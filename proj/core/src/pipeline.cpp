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

#include "prunelab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "prunelab/distill.hpp"
#include "prunelab/error.hpp"
#include "prunelab/pruning.hpp"
#include "prunelab/spectral.hpp"
#include "prunelab/text.hpp"

namespace prunelab {
namespace {

// Independent RNG streams derived from the run seed.
constexpr std::uint64_t kTeacherStream = 0x7465616368657221ULL;
constexpr std::uint64_t kStudentStream = 0x73747564656e7421ULL;
constexpr std::uint64_t kMaskStream = 0x6d61736b6d61736bULL;

std::vector<ScheduleStep> schedule_for(const OptimizerConfig& o, std::size_t epochs) {
  return step_decay_schedule(o.decay_every, o.decay_factor, epochs);
}

struct Probe {
  Grid1D grid;
  std::vector<int> bands;
  Spectrum target;
};

std::optional<Probe> make_probe(const ExperimentConfig& config) {
  if (!config.probe) return std::nullopt;
  Probe p;
  p.grid = config.probe->grid;
  p.bands = config.probe->bands;
  std::vector<double> ys;
  for (double x : p.grid.points()) {
    ys.push_back(multifreq_value(config.dataset.bands, config.dataset.lo, config.dataset.hi, x));
  }
  p.target = dft(ys);
  return p;
}

struct RowContext {
  const ExperimentConfig* config;
  const DataSplits* data;
  const std::optional<Probe>* probe;
  std::string run_id;
  std::string pipeline;
  std::uint64_t seed;
};

MetricsRow make_row(const RowContext& ctx, const std::string& phase, std::size_t epoch,
                    const Network& net, const OptimizerState& opt,
                    const EpochMetrics* train, const Network* reference) {
  MetricsRow r;
  r.run_id = ctx.run_id;
  r.pipeline = ctx.pipeline;
  r.seed = ctx.seed;
  r.phase = phase;
  r.epoch = epoch;
  if (train) {
    r.lr = opt.rate_at(opt.epochs_done - 1);
    r.train_loss = train->loss;
    r.train_acc = train->accuracy;
  }
  const LossKind loss = ctx.config->loss;
  if (ctx.data->val.size() > 0) {
    const EvalResult v = evaluate(net, ctx.data->val, loss);
    r.val_loss = v.loss;
    r.val_acc = v.accuracy;
  }
  const EvalResult t = evaluate(net, ctx.data->test, loss);
  r.test_loss = t.loss;
  r.test_acc = t.accuracy;
  r.classes = ctx.data->test.num_classes;
  r.test_samples = ctx.data->test.size();
  r.removed_fraction = net.masks ? sparsity(*net.masks).removed_fraction : 0.0;
  if (ctx.config->track_norms) {
    const NormReport report = compute_norm_report(net);
    r.norm_product = report.norm_product;
    r.flow_norm = report.flow_norm;
    if (reference) r.flow_drift = pruning_stability(*reference, net).flow_drift;
  }
  if (*ctx.probe) {
    const Probe& p = **ctx.probe;
    const Spectrum s = network_spectrum(net, p.grid);
    for (int k : p.bands) r.band_errors.emplace_back(k, band_error(s, p.target, k));
  }
  return r;
}

std::string teacher_fingerprint(const ExperimentConfig& c, std::uint64_t seed) {
  std::ostringstream os;
  os << seed << '|' << c.network.input_dim << '|';
  for (auto w : c.network.layer_widths) os << w << ',';
  os << '|' << static_cast<int>(c.network.init) << c.network.affine_input << '|'
     << static_cast<int>(c.dataset.kind) << c.dataset.train_images << c.dataset.train_labels
     << c.dataset.test_images << c.dataset.test_labels << c.dataset.train_limit << ','
     << c.dataset.test_limit << ',' << c.dataset.on_grid << c.dataset.n_samples << ','
     << c.dataset.test_samples << ',' << format_double(c.dataset.noise_sd) << ','
     << format_double(c.dataset.lo) << ',' << format_double(c.dataset.hi) << ','
     << format_double(c.dataset.val_fraction) << '|';
  for (const auto& b : c.dataset.bands) {
    os << b.k << ':' << format_double(b.amplitude) << ':' << format_double(b.phase) << ';';
  }
  const auto& o = c.teacher_optimizer;
  os << '|' << format_double(o.learning_rate) << ',' << format_double(o.momentum) << ','
     << format_double(o.weight_decay) << ',' << o.batch_size << ',' << o.decay_every << ','
     << format_double(o.decay_factor) << '|' << c.epochs_teacher << '|'
     << static_cast<int>(c.loss) << '|' << c.track_norms << '|' << c.name;
  if (c.probe) {
    os << "|probe" << format_double(c.probe->grid.lo) << ',' << format_double(c.probe->grid.hi)
       << ',' << c.probe->grid.n;
    for (int k : c.probe->bands) os << ',' << k;
  }
  return os.str();
}

std::string run_id_for(const ExperimentConfig& c, Pipeline p, std::uint64_t seed) {
  return c.name + "/" + std::string(pipeline_name(p)) + "/seed" + std::to_string(seed);
}

}  // namespace

TeacherResult train_teacher(const ExperimentConfig& config, std::uint64_t seed,
                            const DataSplits& data,
                            std::span<const std::size_t> snapshot_epochs) {
  NetworkSpec spec = config.network;
  spec.seed = seed;
  Network net = init_network(spec);
  const auto& oc = config.teacher_optimizer;
  OptimizerState opt = make_optimizer(net, oc.learning_rate, oc.momentum, oc.weight_decay,
                                      schedule_for(oc, config.epochs_teacher));
  std::mt19937_64 rng(seed ^ kTeacherStream);
  const auto probe = make_probe(config);
  // Teacher rows are labelled by the consuming pipeline later.
  const RowContext ctx{&config, &data, &probe, "", "", seed};
  auto wanted = [&](std::size_t e) {
    return std::find(snapshot_epochs.begin(), snapshot_epochs.end(), e) != snapshot_epochs.end();
  };

  TeacherResult result;
  result.initial = make_checkpoint(net, &opt, &rng);
  result.rows.push_back(make_row(ctx, "teacher", 0, net, opt, nullptr, nullptr));
  if (wanted(0)) result.snapshots[0] = result.initial;
  for (std::size_t e = 1; e <= config.epochs_teacher; ++e) {
    const EpochMetrics m = train_epoch(net, data.train, opt, config.loss, oc.batch_size, rng);
    result.rows.push_back(make_row(ctx, "teacher", e, net, opt, &m, nullptr));
    if (wanted(e)) result.snapshots[e] = make_checkpoint(net, &opt, &rng);
  }
  result.final_state = make_checkpoint(net, &opt, &rng);
  return result;
}

std::shared_ptr<const TeacherResult> TeacherCache::get(
    const ExperimentConfig& config, std::uint64_t seed, const DataSplits& data,
    std::span<const std::size_t> snapshot_epochs) {
  const std::string key = teacher_fingerprint(config, seed);
  std::vector<std::size_t> epochs(snapshot_epochs.begin(), snapshot_epochs.end());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      const bool complete = std::all_of(epochs.begin(), epochs.end(), [&](std::size_t e) {
        return it->second->snapshots.count(e) > 0;
      });
      if (complete) return it->second;
      for (const auto& [e, _] : it->second->snapshots) epochs.push_back(e);
    }
  }
  auto fresh = std::make_shared<const TeacherResult>(train_teacher(config, seed, data, epochs));
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = fresh;
  return fresh;
}

RunResult run_pipeline(const ExperimentConfig& config, std::uint64_t seed,
                       const RunOptions& options, TeacherCache* cache) {
  config.validate();
  const DataSplits data = load_data(config, seed);

  RunResult result;
  result.pipeline = config.pipeline;
  result.seed = seed;
  result.run_id = run_id_for(config, config.pipeline, seed);
  if (options.out_dir) {
    result.run_dir = *options.out_dir / (std::string(pipeline_name(config.pipeline)) + "-seed" +
                                         std::to_string(seed));
    std::filesystem::create_directories(*result.run_dir);
  }

  const std::size_t snapshot_epoch = config.prune.prune_epoch;
  const std::size_t snapshots[] = {snapshot_epoch};
  const std::span<const std::size_t> needed =
      config.pipeline == Pipeline::kWilton ? std::span<const std::size_t>(snapshots)
                                           : std::span<const std::size_t>();
  std::shared_ptr<const TeacherResult> teacher =
      cache ? cache->get(config, seed, data, needed)
            : std::make_shared<const TeacherResult>(train_teacher(config, seed, data, needed));

  for (MetricsRow row : teacher->rows) {
    row.run_id = result.run_id;
    row.pipeline = std::string(pipeline_name(config.pipeline));
    result.rows.push_back(std::move(row));
  }
  const Network teacher_final = restore_network(teacher->final_state);
  const std::uint64_t teacher_sum = checksum(teacher_final.weights);

  auto finish = [&](const Network& net) {
    result.final_net = net;
    const MetricsRow& last = result.rows.back();
    result.final_test_acc = last.test_acc;
    result.final_test_loss = last.test_loss;
    result.final_val_acc = last.val_acc;
    if (result.run_dir) {
      write_text_file(*result.run_dir / "metrics.csv", metrics_csv(result.rows));
    }
  };

  if (result.run_dir) {
    save_checkpoint(*result.run_dir / "teacher_final.wltn", teacher->final_state);
  }
  if (config.pipeline == Pipeline::kDenseBaseline) {
    finish(teacher_final);
    return result;
  }

  // Unpruned network the mask is chosen from; flow drift is measured
  // against it.
  Network reference;
  MaskSet mask;
  switch (config.pipeline) {
    case Pipeline::kWilton: {
      const Checkpoint& snap = teacher->snapshots.at(snapshot_epoch);
      if (result.run_dir) {
        save_checkpoint(*result.run_dir / ("teacher_epoch" + std::to_string(snapshot_epoch) +
                                           ".wltn"),
                        snap);
      }
      reference = restore_network(snap);
      mask = select_magnitude(reference, config.prune);
      break;
    }
    case Pipeline::kVanillaMbp:
    case Pipeline::kLotteryTicket:
      reference = teacher_final;
      mask = select_magnitude(reference, config.prune);
      break;
    case Pipeline::kRandomPrune:
      reference = teacher_final;
      mask = select_random(reference, config.prune, seed ^ kMaskStream);
      break;
    case Pipeline::kDenseBaseline:
      break;
  }
  result.mask = mask;

  Network student = config.pipeline == Pipeline::kLotteryTicket ? rewind(reference, mask)
                                                                 : apply_mask(reference, mask);
  student.epoch = 0;

  const auto& oc = config.student_optimizer;
  OptimizerState opt = make_optimizer(student, oc.learning_rate, oc.momentum, oc.weight_decay,
                                      schedule_for(oc, config.epochs_student));
  std::mt19937_64 rng(seed ^ kStudentStream);
  const auto probe = make_probe(config);
  const RowContext ctx{&config, &data, &probe, result.run_id,
                       std::string(pipeline_name(config.pipeline)), seed};
  result.rows.push_back(make_row(ctx, "student", 0, student, opt, nullptr, &reference));

  if (config.pipeline == Pipeline::kWilton) {
    DistillConfig dc = config.distill;
    dc.epochs = config.epochs_student;
    distill_train(student, teacher_final, data.train, opt, dc, oc.batch_size, rng,
                  [&](const Network& s, const EpochMetrics& m) {
                    result.rows.push_back(
                        make_row(ctx, "student", s.epoch, s, opt, &m, &reference));
                  });
  } else {
    for (std::size_t e = 1; e <= config.epochs_student; ++e) {
      const EpochMetrics m =
          train_epoch(student, data.train, opt, config.loss, oc.batch_size, rng);
      result.rows.push_back(make_row(ctx, "student", e, student, opt, &m, &reference));
    }
  }
  if (checksum(teacher_final.weights) != teacher_sum ||
      checksum(restore_network(teacher->final_state).weights) != teacher_sum) {
    throw Error(ErrorCode::kFrozenTeacherMutated, "teacher changed during the student stage");
  }
  if (result.run_dir) {
    save_checkpoint(*result.run_dir / "student_final.wltn", make_checkpoint(student, &opt, &rng));
  }
  finish(student);
  return result;
}

RunResult run_distill_stage(const ExperimentConfig& config, std::uint64_t seed,
                            const Checkpoint& teacher_ckpt, const Checkpoint& student_ckpt,
                            const RunOptions& options) {
  config.validate();
  const DataSplits data = load_data(config, seed);
  const Network teacher = restore_network(teacher_ckpt);
  Network student = restore_network(student_ckpt);
  student.epoch = 0;
  if (student.masks) student = apply_mask(student, *student.masks);

  RunResult result;
  result.pipeline = Pipeline::kWilton;
  result.seed = seed;
  result.run_id = config.name + "/distill/seed" + std::to_string(seed);
  result.mask = student.masks;
  result.run_dir = options.out_dir;
  if (result.run_dir) std::filesystem::create_directories(*result.run_dir);

  const auto& oc = config.student_optimizer;
  OptimizerState opt = make_optimizer(student, oc.learning_rate, oc.momentum, oc.weight_decay,
                                      schedule_for(oc, config.epochs_student));
  std::mt19937_64 rng(seed ^ kStudentStream);
  const auto probe = make_probe(config);
  const RowContext ctx{&config, &data, &probe, result.run_id, "distill", seed};
  const Network reference = student;
  result.rows.push_back(make_row(ctx, "student", 0, student, opt, nullptr, &reference));
  DistillConfig dc = config.distill;
  dc.epochs = config.epochs_student;
  distill_train(student, teacher, data.train, opt, dc, oc.batch_size, rng,
                [&](const Network& s, const EpochMetrics& m) {
                  result.rows.push_back(make_row(ctx, "student", s.epoch, s, opt, &m, &reference));
                });
  const MetricsRow& last = result.rows.back();
  result.final_test_acc = last.test_acc;
  result.final_test_loss = last.test_loss;
  result.final_val_acc = last.val_acc;
  if (result.run_dir) {
    write_text_file(*result.run_dir / "metrics.csv", metrics_csv(result.rows));
    save_checkpoint(*result.run_dir / "student_final.wltn", make_checkpoint(student, &opt, &rng));
  }
  result.final_net = std::move(student);
  return result;
}

std::size_t parallel_runs_limit() {
  if (const char* env = std::getenv("PRUNELAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

namespace {

// Runs job(i) for i < n on up to parallel_runs_limit() threads; rethrows the
// first failure.
template <typename Job>
void for_each_parallel(std::size_t n, const Job& job) {
  const std::size_t workers = std::min(n, parallel_runs_limit());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<RunResult> run_experiment(const ExperimentConfig& config, const RunOptions& options,
                                      TeacherCache* cache) {
  config.validate();
  std::vector<RunResult> results(config.seeds.size());
  for_each_parallel(config.seeds.size(), [&](std::size_t i) {
    results[i] = run_pipeline(config, config.seeds[i], options, cache);
  });
  return results;
}

std::vector<RunResult> run_wilton(const ExperimentConfig& config, const RunOptions& options,
                                  TeacherCache* cache) {
  if (config.pipeline != Pipeline::kWilton) {
    throw Error(ErrorCode::kConfig, "run_wilton needs pipeline 'wilton'");
  }
  return run_experiment(config, options, cache);
}

std::vector<RunResult> run_baseline(const ExperimentConfig& config, const RunOptions& options,
                                    TeacherCache* cache) {
  if (config.pipeline == Pipeline::kWilton) {
    throw Error(ErrorCode::kConfig, "run_baseline needs a baseline pipeline");
  }
  return run_experiment(config, options, cache);
}

const AblationCell& AblationTable::at(std::size_t prune_epoch, double ratio) const {
  for (const auto& c : cells) {
    if (c.prune_epoch == prune_epoch && c.ratio == ratio) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "no ablation cell for epoch " +
                                               std::to_string(prune_epoch));
}

std::string AblationTable::matrix_csv() const {
  std::string out = "ratio";
  for (std::size_t e : epochs) out += ",epoch_" + std::to_string(e);
  out += "\n";
  for (double r : ratios) {
    out += format_double(r);
    for (std::size_t e : epochs) out += "," + format_double(at(e, r).mean_test_acc);
    out += "\n";
  }
  return out;
}

std::string AblationTable::long_csv() const {
  std::string out = "ratio,prune_epoch,seed,test_acc\n";
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      out += format_double(c.ratio) + "," + std::to_string(c.prune_epoch) + "," +
             std::to_string(seeds[i]) + "," + format_double(c.test_acc[i]) + "\n";
    }
  }
  return out;
}

AblationTable run_ablation_prune_epoch(const ExperimentConfig& config,
                                       std::span<const std::size_t> epochs,
                                       std::span<const double> ratios,
                                       const RunOptions& options, TeacherCache* cache) {
  if (epochs.empty() || ratios.empty()) {
    throw Error(ErrorCode::kConfig, "ablation needs at least one epoch and one ratio");
  }
  ExperimentConfig base = config;
  base.pipeline = Pipeline::kWilton;
  base.validate();
  for (std::size_t e : epochs) {
    if (e > base.epochs_teacher) {
      throw Error(ErrorCode::kConfig, "ablation epoch " + std::to_string(e) +
                                          " exceeds epochs_teacher");
    }
  }
  for (double r : ratios) {
    PruneRecipe recipe = base.prune;
    recipe.ratio = r;
    recipe.validate();
  }

  TeacherCache local;
  TeacherCache& teachers = cache ? *cache : local;

  AblationTable table;
  table.epochs.assign(epochs.begin(), epochs.end());
  table.ratios.assign(ratios.begin(), ratios.end());
  table.seeds = base.seeds;
  for (double r : ratios) {
    for (std::size_t e : epochs) {
      AblationCell cell;
      cell.prune_epoch = e;
      cell.ratio = r;
      cell.test_acc.assign(base.seeds.size(), NAN);
      table.cells.push_back(cell);
    }
  }

  for_each_parallel(base.seeds.size(), [&](std::size_t si) {
    const std::uint64_t seed = base.seeds[si];
    // One teacher run per seed, with every requested snapshot.
    teachers.get(base, seed, load_data(base, seed), epochs);
    for (auto& cell : table.cells) {
      ExperimentConfig c = base;
      c.prune.ratio = cell.ratio;
      c.prune.prune_epoch = cell.prune_epoch;
      RunOptions o;
      if (options.out_dir) {
        o.out_dir = *options.out_dir / ("ratio" + format_double(cell.ratio) + "-epoch" +
                                        std::to_string(cell.prune_epoch));
      }
      cell.test_acc[si] = run_pipeline(c, seed, o, &teachers).final_test_acc;
    }
  });

  for (auto& cell : table.cells) {
    cell.median_test_acc = median(cell.test_acc);
    double s = 0.0;
    for (double a : cell.test_acc) s += a;
    cell.mean_test_acc = s / static_cast<double>(cell.test_acc.size());
  }
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    write_text_file(*options.out_dir / "ablation.csv", table.long_csv());
    write_text_file(*options.out_dir / "ablation_matrix.csv", table.matrix_csv());
  }
  return table;
}

}  // namespace prunelab
