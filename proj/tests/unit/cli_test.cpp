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

#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "prunelab/checkpoint.hpp"
#include "prunelab/cli.hpp"

namespace prunelab {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "prunelab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool has_error_line(const std::string& err, const std::string& code) {
  return err.find("prunelab: error code=" + code + " message=\"") != std::string::npos;
}

TEST_CASE("run writes CSV and checkpoints under --out") {
  fixture::TempDir dir("cli_run");
  fixture::write_tiny_idx(dir.path);
  fixture::write_text(dir.path / "wilton.json", fixture::tiny_idx_config("wilton"));
  const auto res = cli({"run", "--config", (dir.path / "wilton.json").string(), "--out",
                        (dir.path / "runs/a").string(), "--seed", "3"});
  CHECK(res.code == 0);
  const fs::path run = dir.path / "runs/a/wilton-seed3";
  CHECK(fs::exists(run / "metrics.csv"));
  CHECK(fs::exists(run / "teacher_final.wltn"));
  CHECK(fs::exists(run / "teacher_epoch2.wltn"));
  CHECK(fs::exists(run / "student_final.wltn"));
  CHECK(res.out.find("wilton") != std::string::npos);

  const auto sum = cli({"summarize", (run / "metrics.csv").string()});
  CHECK(sum.code == 0);
  CHECK(sum.out.find("wilton,0.5000,1") != std::string::npos);
}

TEST_CASE("train, prune and distill chain through checkpoints") {
  fixture::TempDir dir("cli_chain");
  fixture::write_tiny_idx(dir.path);
  const auto cfg = dir.path / "c.json";
  fixture::write_text(cfg, fixture::tiny_idx_config("wilton"));
  CHECK(cli({"train", "--config", cfg.string(), "--seed", "1", "--out",
             (dir.path / "t").string()}).code == 0);
  const fs::path teacher = dir.path / "t/dense-baseline-seed1/teacher_final.wltn";
  REQUIRE(fs::exists(teacher));

  const auto pr = cli({"prune", "--checkpoint", teacher.string(), "--ratio", "0.75", "--out",
                       (dir.path / "p").string()});
  CHECK(pr.code == 0);
  CHECK(pr.out.find("removed_fraction=0.75") != std::string::npos);
  const Checkpoint pruned = load_checkpoint(dir.path / "p/pruned.wltn");
  REQUIRE(pruned.masks.has_value());

  const auto ds = cli({"distill", "--config", cfg.string(), "--seed", "1", "--teacher",
                       teacher.string(), "--student", (dir.path / "p/pruned.wltn").string(),
                       "--out", (dir.path / "d").string()});
  CHECK(ds.code == 0);
  CHECK(fs::exists(dir.path / "d/metrics.csv"));
}

TEST_CASE("spectrum of a checkpoint") {
  fixture::TempDir dir("cli_spec");
  const std::string cfg = R"({
    "pipeline": "dense-baseline",
    "network": {"input_dim": 1, "layer_widths": [8, 1], "affine_input": true},
    "dataset": {"kind": "multifreq", "bands": [{"k": 1}, {"k": 3}], "on_grid": true,
                "n_samples": 32},
    "epochs_teacher": 2,
    "probe": {"grid": {"n": 32}, "bands": [1, 3]},
    "checkpoint": "run/dense-baseline-seed1/teacher_final.wltn"
  })";
  fixture::write_text(dir.path / "probe.json", cfg);
  CHECK(cli({"run", "--config", (dir.path / "probe.json").string(), "--out",
             (dir.path / "run").string()}).code == 0);
  const auto res = cli({"spectrum", "--config", (dir.path / "probe.json").string(), "--out",
                        (dir.path / "spec").string()});
  CHECK(res.code == 0);
  std::ifstream in(dir.path / "spec/spectrum.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,re,im,amplitude,target_amplitude,band_error");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 17);
}

TEST_CASE("usage and config failures") {
  const auto none = cli({});
  CHECK(none.code == 2);
  CHECK(has_error_line(none.err, "usage"));

  const auto unknown = cli({"explode"});
  CHECK(unknown.code == 2);
  CHECK(has_error_line(unknown.err, "usage"));

  const auto flag = cli({"run", "--frobnicate"});
  CHECK(flag.code == 2);
  CHECK(has_error_line(flag.err, "usage"));

  const auto no_cfg = cli({"run"});
  CHECK(no_cfg.code == 2);
  CHECK(has_error_line(no_cfg.err, "config"));

  fixture::TempDir dir("cli_err");
  const auto out = dir.path / "should_not_exist";
  const auto missing = cli({"run", "--config", (dir.path / "nope.json").string(), "--out",
                            out.string()});
  CHECK(missing.code != 0);
  CHECK(has_error_line(missing.err, "io"));
  CHECK_FALSE(fs::exists(out));

  fixture::write_text(dir.path / "bad.json", fixture::tiny_idx_config("wilton", R"(, "oops": 1)"));
  const auto bad = cli({"run", "--config", (dir.path / "bad.json").string(), "--out", out.string()});
  CHECK(bad.code == 2);
  CHECK(has_error_line(bad.err, "config"));
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("help exits cleanly") {
  const auto res = cli({"--help"});
  CHECK(res.code == 0);
  CHECK(res.out.find("ablate") != std::string::npos);
}

}  // namespace
}  // namespace prunelab
