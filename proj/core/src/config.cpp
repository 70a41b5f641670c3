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

#include "prunelab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "prunelab/error.hpp"

namespace prunelab {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, where + ": " + what);
}

void require_object(const json& j, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where + "." + key, e.what());
  }
}

template <typename T>
T get_required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where, "missing required key '" + key + "'");
  return get<T>(j, key, where, T{});
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where,
                      std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(where + "." + key, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

OptimizerConfig parse_optimizer(const json& j, const std::string& where,
                                OptimizerConfig base) {
  require_object(j, where,
                 {"lr", "momentum", "weight_decay", "batch_size", "decay_every", "decay_factor"});
  base.learning_rate = get<double>(j, "lr", where, base.learning_rate);
  base.momentum = get<double>(j, "momentum", where, base.momentum);
  base.weight_decay = get<double>(j, "weight_decay", where, base.weight_decay);
  base.batch_size = get_count(j, "batch_size", where, base.batch_size);
  base.decay_every = get_count(j, "decay_every", where, base.decay_every);
  base.decay_factor = get<double>(j, "decay_factor", where, base.decay_factor);
  return base;
}

void validate_optimizer(const OptimizerConfig& o, const std::string& where) {
  if (!(o.learning_rate > 0.0)) fail(where, "lr must be > 0");
  if (!(o.momentum >= 0.0 && o.momentum < 1.0)) fail(where, "momentum must be in [0, 1)");
  if (!(o.weight_decay >= 0.0)) fail(where, "weight_decay must be >= 0");
  if (o.batch_size == 0) fail(where, "batch_size must be >= 1");
  if (!(o.decay_factor > 0.0)) fail(where, "decay_factor must be > 0");
}

}  // namespace

std::string_view pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::kWilton: return "wilton";
    case Pipeline::kVanillaMbp: return "vanilla-mbp";
    case Pipeline::kLotteryTicket: return "lottery-ticket";
    case Pipeline::kRandomPrune: return "random-prune";
    case Pipeline::kDenseBaseline: return "dense-baseline";
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::kWilton, Pipeline::kVanillaMbp, Pipeline::kLotteryTicket,
                     Pipeline::kRandomPrune, Pipeline::kDenseBaseline}) {
    if (pipeline_name(p) == name) return p;
  }
  throw Error(ErrorCode::kConfig, "unknown pipeline '" + std::string(name) + "'");
}

bool pipeline_prunes(Pipeline p) { return p != Pipeline::kDenseBaseline; }

void ExperimentConfig::validate() const {
  try {
    network.validate();
  } catch (const Error& e) {
    fail("network", e.what());
  }
  if (seeds.empty()) fail("seeds", "at least one seed is required");
  if (epochs_teacher == 0) fail("epochs_teacher", "must be >= 1");
  if (pipeline_prunes(pipeline) && epochs_student == 0) fail("epochs_student", "must be >= 1");
  if (!(prune.ratio >= 0.0 && prune.ratio < 1.0)) fail("prune.ratio", "must be in [0, 1)");
  if (prune.prune_epoch > epochs_teacher) {
    fail("prune.prune_epoch", "exceeds epochs_teacher (" + std::to_string(epochs_teacher) + ")");
  }
  if (pipeline == Pipeline::kWilton && prune.rule != PruneRule::kMagnitude) {
    fail("prune.rule", "wilton selects its mask by magnitude");
  }
  if (!(distill.temperature > 0.0)) fail("distill.temperature", "must be > 0");
  if (!(distill.alpha >= 0.0 && distill.alpha <= 1.0)) fail("distill.alpha", "must be in [0, 1]");
  validate_optimizer(teacher_optimizer, "optimizer");
  validate_optimizer(student_optimizer, "student_optimizer");

  const bool regression = dataset.kind == DatasetConfig::Kind::kMultiFreq;
  if (regression && loss != LossKind::kMse) fail("loss", "multifreq data needs loss 'mse'");
  if (!regression && loss != LossKind::kCrossEntropy) {
    fail("loss", "idx data needs loss 'cross-entropy'");
  }
  if (!(dataset.val_fraction >= 0.0 && dataset.val_fraction < 1.0)) {
    fail("dataset.val_fraction", "must be in [0, 1)");
  }
  if (regression) {
    if (dataset.bands.empty()) fail("dataset.bands", "at least one band is required");
    std::set<int> ks;
    for (const auto& b : dataset.bands) {
      if (!ks.insert(b.k).second) fail("dataset.bands", "duplicate k=" + std::to_string(b.k));
    }
    if (!(dataset.lo < dataset.hi)) fail("dataset.domain", "requires lo < hi");
    if (dataset.on_grid) {
      try {
        Grid1D{dataset.lo, dataset.hi, dataset.n_samples}.validate();
      } catch (const Error& e) {
        fail("dataset.n_samples", e.what());
      }
    } else if (dataset.n_samples < 16) {
      fail("dataset.n_samples", "must be >= 16");
    }
    if (dataset.test_samples < 16) fail("dataset.test_samples", "must be >= 16");
    if (network.input_dim != 1) fail("network.input_dim", "multifreq data is 1-D");
  } else {
    if (dataset.train_images.empty() || dataset.train_labels.empty() ||
        dataset.test_images.empty() || dataset.test_labels.empty()) {
      fail("dataset", "idx data needs train/test image and label paths");
    }
  }
  if (probe) {
    if (!regression) fail("probe", "spectral probes need multifreq data");
    try {
      probe->grid.validate();
    } catch (const Error& e) {
      fail("probe.grid", e.what());
    }
    if (network.output_dim() != 1) fail("probe", "spectral probes need a single output");
    for (int k : probe->bands) {
      if (k < 0 || static_cast<std::size_t>(k) > probe->grid.n / 2) {
        fail("probe.bands", "k=" + std::to_string(k) + " is not resolvable on the grid");
      }
    }
    if (!(probe->delta > 0.0)) fail("probe.delta", "must be > 0");
  }
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail("config", std::string("invalid JSON: ") + e.what());
  }
  require_object(j, "config",
                 {"name", "pipeline", "network", "dataset", "prune", "distill", "optimizer",
                  "student_optimizer", "loss", "epochs_teacher", "epochs_student", "seeds",
                  "probe", "track_norms", "checkpoint"});

  ExperimentConfig c;
  c.name = get<std::string>(j, "name", "config", c.name);
  c.pipeline = parse_pipeline(get_required<std::string>(j, "pipeline", "config"));

  if (!j.contains("network")) fail("config", "missing required key 'network'");
  const json& net = j.at("network");
  require_object(net, "network", {"input_dim", "layer_widths", "init", "affine_input"});
  c.network.input_dim = get_count(net, "input_dim", "network", 0);
  c.network.layer_widths =
      get_required<std::vector<std::size_t>>(net, "layer_widths", "network");
  c.network.init =
      parse_init_scheme(get<std::string>(net, "init", "network", "he-normal"));
  c.network.affine_input = get<bool>(net, "affine_input", "network", false);

  if (!j.contains("dataset")) fail("config", "missing required key 'dataset'");
  const json& ds = j.at("dataset");
  const std::string kind = get_required<std::string>(ds, "kind", "dataset");
  if (kind == "idx") {
    require_object(ds, "dataset",
                   {"kind", "train_images", "train_labels", "test_images", "test_labels",
                    "train_limit", "test_limit", "val_fraction"});
    c.dataset.kind = DatasetConfig::Kind::kIdx;
    c.dataset.train_images =
        resolve(base_dir, get_required<std::string>(ds, "train_images", "dataset"));
    c.dataset.train_labels =
        resolve(base_dir, get_required<std::string>(ds, "train_labels", "dataset"));
    c.dataset.test_images =
        resolve(base_dir, get_required<std::string>(ds, "test_images", "dataset"));
    c.dataset.test_labels =
        resolve(base_dir, get_required<std::string>(ds, "test_labels", "dataset"));
    c.dataset.train_limit = get_count(ds, "train_limit", "dataset", 0);
    c.dataset.test_limit = get_count(ds, "test_limit", "dataset", 0);
    c.loss = LossKind::kCrossEntropy;
  } else if (kind == "multifreq") {
    require_object(ds, "dataset",
                   {"kind", "bands", "on_grid", "n_samples", "test_samples", "noise_sd",
                    "domain", "val_fraction"});
    c.dataset.kind = DatasetConfig::Kind::kMultiFreq;
    if (!ds.contains("bands") || !ds.at("bands").is_array()) {
      fail("dataset", "multifreq needs a 'bands' array");
    }
    for (const json& b : ds.at("bands")) {
      require_object(b, "dataset.bands[]", {"k", "amplitude", "phase"});
      FrequencyBand band;
      band.k = get_required<int>(b, "k", "dataset.bands[]");
      band.amplitude = get<double>(b, "amplitude", "dataset.bands[]", 1.0);
      band.phase = get<double>(b, "phase", "dataset.bands[]", 0.0);
      c.dataset.bands.push_back(band);
    }
    c.dataset.on_grid = get<bool>(ds, "on_grid", "dataset", false);
    c.dataset.n_samples = get_count(ds, "n_samples", "dataset", c.dataset.n_samples);
    c.dataset.test_samples = get_count(ds, "test_samples", "dataset", c.dataset.test_samples);
    c.dataset.noise_sd = get<double>(ds, "noise_sd", "dataset", 0.0);
    if (ds.contains("domain")) {
      const auto dom = get<std::vector<double>>(ds, "domain", "dataset", {});
      if (dom.size() != 2) fail("dataset.domain", "expected [lo, hi]");
      c.dataset.lo = dom[0];
      c.dataset.hi = dom[1];
    }
    c.loss = LossKind::kMse;
  } else {
    fail("dataset.kind", "expected 'idx' or 'multifreq', got '" + kind + "'");
  }
  c.dataset.val_fraction = get<double>(ds, "val_fraction", "dataset", 0.1);
  if (j.contains("loss")) c.loss = parse_loss_kind(get<std::string>(j, "loss", "config", ""));

  if (j.contains("prune")) {
    const json& p = j.at("prune");
    require_object(p, "prune", {"ratio", "scope", "rule", "prune_epoch"});
    c.prune.ratio = get<double>(p, "ratio", "prune", c.prune.ratio);
    c.prune.scope = parse_prune_scope(get<std::string>(p, "scope", "prune", "global"));
    c.prune.rule = parse_prune_rule(get<std::string>(p, "rule", "prune", "magnitude"));
    c.prune.prune_epoch = get_count(p, "prune_epoch", "prune", 0);
  } else if (pipeline_prunes(c.pipeline)) {
    fail("config", "pipeline '" + std::string(pipeline_name(c.pipeline)) +
                       "' requires a 'prune' section");
  }

  if (j.contains("distill")) {
    const json& d = j.at("distill");
    require_object(d, "distill", {"temperature", "alpha"});
    c.distill.temperature = get<double>(d, "temperature", "distill", c.distill.temperature);
    c.distill.alpha = get<double>(d, "alpha", "distill", c.distill.alpha);
  } else if (c.pipeline == Pipeline::kWilton) {
    fail("config", "pipeline 'wilton' requires a 'distill' section");
  }

  if (j.contains("optimizer")) {
    c.teacher_optimizer = parse_optimizer(j.at("optimizer"), "optimizer", c.teacher_optimizer);
  }
  c.student_optimizer = c.teacher_optimizer;
  if (j.contains("student_optimizer")) {
    c.student_optimizer =
        parse_optimizer(j.at("student_optimizer"), "student_optimizer", c.teacher_optimizer);
  }

  c.epochs_teacher = get_count(j, "epochs_teacher", "config", c.epochs_teacher);
  c.epochs_student = get_count(j, "epochs_student", "config", c.epochs_student);
  c.distill.epochs = c.epochs_student;
  if (j.contains("seeds")) c.seeds = get<std::vector<std::uint64_t>>(j, "seeds", "config", {});
  c.track_norms = get<bool>(j, "track_norms", "config", true);

  if (j.contains("probe")) {
    const json& p = j.at("probe");
    require_object(p, "probe", {"grid", "bands", "delta"});
    ProbeConfig probe;
    if (p.contains("grid")) {
      const json& g = p.at("grid");
      require_object(g, "probe.grid", {"lo", "hi", "n"});
      probe.grid.lo = get<double>(g, "lo", "probe.grid", 0.0);
      probe.grid.hi = get<double>(g, "hi", "probe.grid", 1.0);
      probe.grid.n = get_count(g, "n", "probe.grid", 256);
    }
    probe.bands = get_required<std::vector<int>>(p, "bands", "probe");
    probe.delta = get<double>(p, "delta", "probe", 0.1);
    c.probe = probe;
  }
  if (j.contains("checkpoint")) {
    c.checkpoint = resolve(base_dir, get<std::string>(j, "checkpoint", "config", ""));
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("PRUNELAB_PRESET_DIR")) return env;
  return PRUNELAB_DEFAULT_PRESET_DIR;
}

ExperimentConfig load_preset(std::string_view name) {
  const auto path = preset_dir() / (std::string(name) + ".json");
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kConfig, "unknown preset '" + std::string(name) + "'");
  }
  return load_config(path);
}

DataSplits load_data(const ExperimentConfig& config, std::uint64_t seed) {
  const DatasetConfig& d = config.dataset;
  Dataset train, test;
  if (d.kind == DatasetConfig::Kind::kIdx) {
    train = take_first(load_idx(d.train_images, d.train_labels), d.train_limit);
    test = take_first(load_idx(d.test_images, d.test_labels), d.test_limit);
    if (train.inputs.cols() != config.network.input_dim) {
      throw Error(ErrorCode::kConfig, "network.input_dim " +
                                          std::to_string(config.network.input_dim) +
                                          " does not match " +
                                          std::to_string(train.inputs.cols()) + " pixels");
    }
    const int classes = std::max(train.num_classes, test.num_classes);
    if (config.network.output_dim() != static_cast<std::size_t>(classes)) {
      throw Error(ErrorCode::kConfig, "output width does not match " +
                                          std::to_string(classes) + " classes");
    }
    train.num_classes = test.num_classes = classes;
  } else {
    if (d.on_grid) {
      train = multifreq_on_grid(d.bands, Grid1D{d.lo, d.hi, d.n_samples});
    } else {
      train = gen_multifreq({d.bands, d.n_samples, d.noise_sd, seed, d.lo, d.hi});
    }
    test = gen_multifreq({d.bands, d.test_samples, 0.0, seed ^ 0x9e3779b97f4a7c15ULL, d.lo, d.hi});
  }
  return split_validation(train, std::move(test), d.val_fraction, seed);
}

}  // namespace prunelab
