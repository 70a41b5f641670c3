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

#include "prunelab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "prunelab/error.hpp"
#include "prunelab/text.hpp"

namespace prunelab {
namespace {

constexpr std::string_view kHeader =
    "run_id,pipeline,seed,phase,epoch,lr,train_loss,train_acc,val_loss,val_acc,"
    "test_loss,test_acc,classes,test_samples,removed_fraction,flow_drift,"
    "norm_product,flow_norm,band_errors";

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bad number '" + s + "' in metrics CSV");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bad integer '" + s + "' in metrics CSV");
  }
  return v;
}

}  // namespace

std::string_view metrics_header() { return kHeader; }

std::string to_csv_line(const MetricsRow& r) {
  std::string bands;
  for (std::size_t i = 0; i < r.band_errors.size(); ++i) {
    if (i) bands += ";";
    bands += std::to_string(r.band_errors[i].first) + ":" + format_double(r.band_errors[i].second);
  }
  std::string line;
  line += r.run_id + "," + r.pipeline + "," + std::to_string(r.seed) + "," + r.phase + "," +
          std::to_string(r.epoch);
  for (double v : {r.lr, r.train_loss, r.train_acc, r.val_loss, r.val_acc, r.test_loss,
                   r.test_acc}) {
    line += "," + format_double(v);
  }
  line += "," + std::to_string(r.classes) + "," + std::to_string(r.test_samples);
  for (double v : {r.removed_fraction, r.flow_drift, r.norm_product, r.flow_norm}) {
    line += "," + format_double(v);
  }
  line += "," + bands;
  return line;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kHeader);
  out += "\n";
  for (const auto& r : rows) out += to_csv_line(r) + "\n";
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  std::vector<MetricsRow> rows;
  const auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != kHeader) {
    throw Error(ErrorCode::kInvalidArgument, "metrics CSV header mismatch");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 19) {
      throw Error(ErrorCode::kInvalidArgument,
                  "metrics CSV line " + std::to_string(i + 1) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    MetricsRow r;
    r.run_id = f[0];
    r.pipeline = f[1];
    r.seed = parse_int<std::uint64_t>(f[2]);
    r.phase = f[3];
    r.epoch = parse_int<std::size_t>(f[4]);
    r.lr = parse_double(f[5]);
    r.train_loss = parse_double(f[6]);
    r.train_acc = parse_double(f[7]);
    r.val_loss = parse_double(f[8]);
    r.val_acc = parse_double(f[9]);
    r.test_loss = parse_double(f[10]);
    r.test_acc = parse_double(f[11]);
    r.classes = parse_int<int>(f[12]);
    r.test_samples = parse_int<std::size_t>(f[13]);
    r.removed_fraction = parse_double(f[14]);
    r.flow_drift = parse_double(f[15]);
    r.norm_product = parse_double(f[16]);
    r.flow_norm = parse_double(f[17]);
    if (!f[18].empty()) {
      for (const auto& pair : split(f[18], ';')) {
        const auto kv = split(pair, ':');
        if (kv.size() != 2) throw Error(ErrorCode::kInvalidArgument, "bad band_errors field");
        r.band_errors.emplace_back(parse_int<int>(kv[0]), parse_double(kv[1]));
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

double median(std::vector<double> values) {
  if (values.empty()) return NAN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SummaryLine> summarize(const std::vector<MetricsRow>& rows) {
  // Final row of each run: the student phase wins over the teacher phase,
  // then the highest epoch.
  std::map<std::string, const MetricsRow*> last;
  for (const auto& r : rows) {
    auto& slot = last[r.run_id];
    auto rank = [](const MetricsRow& m) {
      return std::make_tuple(m.phase == "student" ? 1 : 0, m.epoch);
    };
    if (!slot || rank(r) >= rank(*slot)) slot = &r;
  }
  struct Group {
    std::vector<double> accs;
    int classes = 0;
    std::size_t samples = 0;
  };
  std::map<std::pair<std::string, double>, Group> groups;
  for (const auto& [_, r] : last) {
    auto& g = groups[{r->pipeline, r->removed_fraction}];
    g.accs.push_back(r->test_acc);
    g.classes = r->classes;
    g.samples += r->test_samples;
  }
  std::vector<SummaryLine> out;
  for (const auto& [key, g] : groups) {
    SummaryLine s;
    s.pipeline = key.first;
    s.removed_fraction = key.second;
    s.runs = g.accs.size();
    s.mean_test_acc = std::accumulate(g.accs.begin(), g.accs.end(), 0.0) / g.accs.size();
    double ss = 0.0;
    for (double a : g.accs) ss += (a - s.mean_test_acc) * (a - s.mean_test_acc);
    s.sd_test_acc = g.accs.size() > 1 ? std::sqrt(ss / (g.accs.size() - 1)) : 0.0;
    if (g.classes > 0 && g.samples > 0 && !std::isnan(s.mean_test_acc)) {
      const double chance = 1.0 / g.classes;
      const double se = std::sqrt(chance * (1.0 - chance) / static_cast<double>(g.samples));
      s.collapsed = s.mean_test_acc <= chance + 3.0 * se;
    }
    out.push_back(s);
  }
  return out;
}

std::string summary_table(const std::vector<SummaryLine>& lines) {
  std::string out = "pipeline,removed_fraction,runs,test_acc_mean,test_acc_sd,status\n";
  char buf[256];
  for (const auto& s : lines) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%zu,%.2f,%.2f,%s\n", s.pipeline.c_str(),
                  s.removed_fraction, s.runs, 100.0 * s.mean_test_acc, 100.0 * s.sd_test_acc,
                  s.collapsed ? "collapsed" : "ok");
    out += buf;
  }
  return out;
}

}  // namespace prunelab
