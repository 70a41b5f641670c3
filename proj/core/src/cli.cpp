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

#include "prunelab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prunelab/checkpoint.hpp"
#include "prunelab/config.hpp"
#include "prunelab/error.hpp"
#include "prunelab/metrics.hpp"
#include "prunelab/pipeline.hpp"
#include "prunelab/pruning.hpp"
#include "prunelab/spectral.hpp"
#include "prunelab/text.hpp"

namespace prunelab {
namespace {

namespace fs = std::filesystem;

// Flags shared by the config-driven subcommands.
struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string pipeline;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_pipeline) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--preset", f.preset, "Named preset from the preset directory");
  cmd->add_option("--seed", f.seed, "Run this single seed instead of the config's list");
  cmd->add_option("--out", f.out, "Output directory");
  if (with_pipeline) cmd->add_option("--pipeline", f.pipeline, "Override the config pipeline");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  if (!f.config.empty() && !f.preset.empty()) {
    throw Error(ErrorCode::kConfig, "--config and --preset are mutually exclusive");
  }
  if (f.config.empty() && f.preset.empty()) {
    throw Error(ErrorCode::kConfig, "one of --config or --preset is required");
  }
  ExperimentConfig c = f.config.empty() ? load_preset(f.preset) : load_config(f.config);
  if (!f.pipeline.empty()) c.pipeline = parse_pipeline(f.pipeline);
  if (f.seed) c.seeds = {*f.seed};
  c.validate();
  return c;
}

RunOptions options_for(const CommonFlags& f) {
  RunOptions o;
  if (!f.out.empty()) o.out_dir = fs::path(f.out);
  return o;
}

void print_results(std::ostream& out, const std::vector<RunResult>& results) {
  std::vector<MetricsRow> rows;
  for (const auto& r : results) {
    out << r.run_id << " test_acc=" << format_double(r.final_test_acc)
        << " test_loss=" << format_double(r.final_test_loss);
    if (r.run_dir) out << " dir=" << r.run_dir->string();
    out << "\n";
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }
  out << summary_table(summarize(rows));
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) {
      throw Error(ErrorCode::kConfig, std::string("bad ") + what + " entry '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::kConfig, std::string("empty ") + what + " list");
  return values;
}

std::string spectrum_csv(const Spectrum& s, const std::optional<Spectrum>& target) {
  std::string csv = target ? "k,re,im,amplitude,target_amplitude,band_error\n"
                           : "k,re,im,amplitude\n";
  for (std::size_t i = 0; i < s.bins(); ++i) {
    const auto a = s.amplitudes[i];
    csv += std::to_string(s.frequencies[i]) + "," + format_double(a.real()) + "," +
           format_double(a.imag()) + "," + format_double(std::abs(a));
    if (target) {
      csv += "," + format_double(std::abs(target->amplitudes[i])) + "," +
             format_double(band_error(s, *target, s.frequencies[i]));
    }
    csv += "\n";
  }
  return csv;
}

void emit(std::ostream& out, const CommonFlags& f, const std::string& file,
          const std::string& text) {
  if (f.out.empty()) {
    out << text;
    return;
  }
  fs::create_directories(f.out);
  write_text_file(fs::path(f.out) / file, text);
  out << "wrote " << (fs::path(f.out) / file).string() << "\n";
}

void report_error(std::ostream& err, std::string_view code, std::string_view message) {
  std::string escaped;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') escaped += '\\';
    escaped += ch == '\n' ? ' ' : ch;
  }
  err << "prunelab: error code=" << code << " message=\"" << escaped << "\"\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magnitude pruning, distillation and spectral probes for bias-free MLPs",
               "prunelab"};
  app.require_subcommand(1);

  CommonFlags train_f, prune_f, distill_f, spectrum_f, run_f, ablate_f, summarize_f;

  auto* train = app.add_subcommand("train", "Train dense teachers for every seed");
  add_common(train, train_f, false);

  auto* prune = app.add_subcommand("prune", "Prune a checkpoint by magnitude or at random");
  add_common(prune, prune_f, false);
  std::string prune_ckpt;
  std::optional<double> prune_ratio;
  std::string prune_rule, prune_scope;
  prune->add_option("--checkpoint", prune_ckpt, "Input checkpoint");
  prune->add_option("--ratio", prune_ratio, "Fraction of weights to remove");
  prune->add_option("--rule", prune_rule, "magnitude | random");
  prune->add_option("--scope", prune_scope, "global | per-layer");

  auto* distill = app.add_subcommand("distill", "Distil a pruned student from a teacher");
  add_common(distill, distill_f, false);
  std::string teacher_ckpt, student_ckpt;
  distill->add_option("--teacher", teacher_ckpt, "Teacher checkpoint")->required();
  distill->add_option("--student", student_ckpt, "Student checkpoint")->required();

  auto* spectrum = app.add_subcommand("spectrum", "One-sided DFT of a scalar network");
  add_common(spectrum, spectrum_f, false);
  std::string spectrum_ckpt;
  spectrum->add_option("--checkpoint", spectrum_ckpt, "Checkpoint (overrides the config)");

  auto* run = app.add_subcommand("run", "Run the configured pipeline for every seed");
  add_common(run, run_f, true);

  auto* ablate = app.add_subcommand("ablate", "Prune-epoch by ratio ablation");
  add_common(ablate, ablate_f, false);
  std::string ablate_epochs, ablate_ratios;
  ablate->add_option("--epochs", ablate_epochs, "Comma-separated prune epochs")->required();
  ablate->add_option("--ratios", ablate_ratios, "Comma-separated ratios (default: config)");

  auto* summ = app.add_subcommand("summarize", "Aggregate metrics CSV files");
  std::vector<std::string> summarize_inputs;
  summ->add_option("inputs", summarize_inputs, "metrics.csv files")->required();
  summ->add_option("--out", summarize_f.out, "Output directory for summary.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << app.help();
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*train) {
      ExperimentConfig c = resolve_config(train_f);
      c.pipeline = Pipeline::kDenseBaseline;
      print_results(out, run_baseline(c, options_for(train_f)));
    } else if (*prune) {
      PruneRecipe recipe;
      std::uint64_t seed = 1;
      std::optional<fs::path> ckpt_path;
      if (!prune_f.config.empty() || !prune_f.preset.empty()) {
        const ExperimentConfig c = resolve_config(prune_f);
        recipe = c.prune;
        seed = c.seeds.front();
        ckpt_path = c.checkpoint;
      }
      if (prune_f.seed) seed = *prune_f.seed;
      if (!prune_ckpt.empty()) ckpt_path = prune_ckpt;
      if (!ckpt_path) throw Error(ErrorCode::kConfig, "prune needs --checkpoint");
      if (prune_ratio) recipe.ratio = *prune_ratio;
      if (!prune_rule.empty()) recipe.rule = parse_prune_rule(prune_rule);
      if (!prune_scope.empty()) recipe.scope = parse_prune_scope(prune_scope);
      recipe.validate();
      const Checkpoint in = load_checkpoint(*ckpt_path);
      const Network pruned = apply_mask(restore_network(in), select_mask(restore_network(in),
                                                                          recipe, seed));
      const Sparsity s = sparsity(*pruned.masks);
      const fs::path dir = prune_f.out.empty() ? fs::path(".") : fs::path(prune_f.out);
      fs::create_directories(dir);
      save_checkpoint(dir / "pruned.wltn", make_checkpoint(pruned));
      out << "kept_fraction=" << format_double(s.kept_fraction)
          << " removed_fraction=" << format_double(s.removed_fraction)
          << " kept=" << pruned.masks->total_kept() << " total=" << pruned.masks->total_size()
          << " out=" << (dir / "pruned.wltn").string() << "\n";
    } else if (*distill) {
      const ExperimentConfig c = resolve_config(distill_f);
      const Checkpoint teacher = load_checkpoint(teacher_ckpt);
      const Checkpoint student = load_checkpoint(student_ckpt);
      std::vector<RunResult> results;
      for (std::uint64_t seed : c.seeds) {
        RunOptions o = options_for(distill_f);
        if (o.out_dir && c.seeds.size() > 1) *o.out_dir /= "seed" + std::to_string(seed);
        results.push_back(run_distill_stage(c, seed, teacher, student, o));
      }
      print_results(out, results);
    } else if (*spectrum) {
      const ExperimentConfig c = resolve_config(spectrum_f);
      if (!c.probe) throw Error(ErrorCode::kConfig, "spectrum needs a 'probe' section");
      std::optional<fs::path> path = c.checkpoint;
      if (!spectrum_ckpt.empty()) path = spectrum_ckpt;
      if (!path) throw Error(ErrorCode::kConfig, "spectrum needs a checkpoint");
      const Network net = restore_network(load_checkpoint(*path));
      const Spectrum s = network_spectrum(net, c.probe->grid);
      std::optional<Spectrum> target;
      if (c.dataset.kind == DatasetConfig::Kind::kMultiFreq) {
        std::vector<double> ys;
        for (double x : c.probe->grid.points()) {
          ys.push_back(multifreq_value(c.dataset.bands, c.dataset.lo, c.dataset.hi, x));
        }
        target = dft(ys);
      }
      emit(out, spectrum_f, "spectrum.csv", spectrum_csv(s, target));
    } else if (*run) {
      const ExperimentConfig c = resolve_config(run_f);
      TeacherCache cache;
      print_results(out, run_experiment(c, options_for(run_f), &cache));
    } else if (*ablate) {
      const ExperimentConfig c = resolve_config(ablate_f);
      const auto epochs = parse_list<std::size_t>(ablate_epochs, "epoch");
      const auto ratios = ablate_ratios.empty() ? std::vector<double>{c.prune.ratio}
                                                : parse_list<double>(ablate_ratios, "ratio");
      const AblationTable t = run_ablation_prune_epoch(c, epochs, ratios, options_for(ablate_f));
      out << t.matrix_csv();
    } else if (*summ) {
      std::vector<MetricsRow> rows;
      for (const auto& in : summarize_inputs) {
        const auto bytes = read_file_bytes(in);
        const auto more = parse_metrics_csv(std::string(bytes.begin(), bytes.end()));
        rows.insert(rows.end(), more.begin(), more.end());
      }
      emit(out, summarize_f, "summary.txt", summary_table(summarize(rows)));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) err << app.help();
    report_error(err, error_code_name(e.code()), e.what());
    return e.code() == ErrorCode::kConfig ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    report_error(err, error_code_name(ErrorCode::kIo), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace prunelab
