// Copyright 2026 The respace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "respace/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "respace/errors.hpp"
#include "respace/io.hpp"
#include "respace/layers.hpp"

namespace respace {

using nlohmann::json;

double similarity_score(const Representation& r_fm, const Representation& r_gt) {
  if (r_fm.space != r_gt.space) {
    throw ShapeError("similarity_score: space mismatch for sample '" + r_fm.sample_id + "'");
  }
  if (r_fm.rows != r_gt.rows || r_fm.dim != r_gt.dim || r_fm.rows == 0) {
    throw ShapeError("similarity_score: sample '" + r_fm.sample_id + "' has " +
                     std::to_string(r_fm.rows) + "x" + std::to_string(r_fm.dim) +
                     " feature representation vs " + std::to_string(r_gt.rows) + "x" +
                     std::to_string(r_gt.dim) + " GT representation");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < r_fm.rows; ++k) {
    try {
      sum += cosine_sim(r_fm.row(k), r_gt.row(k));
    } catch (const DegenerateVectorError& e) {
      throw DegenerateVectorError("sample '" + r_fm.sample_id + "' camera " + std::to_string(k) +
                                  ": " + e.what());
    }
  }
  return sum / static_cast<double>(r_fm.rows);
}

std::vector<int> SimilaritySeries::phase_indices() const {
  std::vector<int> out;
  for (const auto& p : phases) out.push_back(p.phase);
  return out;
}

std::vector<double> SimilaritySeries::means() const {
  std::vector<double> out;
  for (const auto& p : phases) out.push_back(p.mean_score);
  return out;
}

SimilaritySeries aggregate_phases(std::vector<SampleScore> scores, const std::string& module_tag,
                                  const std::vector<int>& expected_phases) {
  std::sort(scores.begin(), scores.end(), [](const SampleScore& a, const SampleScore& b) {
    return std::tie(a.phase, a.sample_id) < std::tie(b.phase, b.sample_id);
  });
  SimilaritySeries series{module_tag, {}};
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const SampleScore& s = scores[i];
    if (i > 0 && scores[i - 1].phase == s.phase && scores[i - 1].sample_id == s.sample_id) {
      throw FormatError("duplicate score for sample '" + s.sample_id + "' phase " +
                        std::to_string(s.phase));
    }
    if (series.phases.empty() || series.phases.back().phase != s.phase) {
      if (!series.phases.empty()) {
        series.phases.back().mean_score = sum / static_cast<double>(series.phases.back().samples);
      }
      series.phases.push_back(PhaseScore{s.phase, 0.0, 0});
      sum = 0.0;
    }
    sum += s.score;
    ++series.phases.back().samples;
  }
  if (!series.phases.empty()) {
    series.phases.back().mean_score = sum / static_cast<double>(series.phases.back().samples);
  }
  for (int p : expected_phases) {
    const bool present = std::any_of(series.phases.begin(), series.phases.end(),
                                     [p](const PhaseScore& ps) { return ps.phase == p; });
    if (!present) throw PhaseMismatchError("phase " + std::to_string(p) + " has no scored samples");
  }
  if (series.phases.empty()) throw PhaseMismatchError("no scores to aggregate");
  return series;
}

double pearson(const std::vector<double>& s, const std::vector<double>& m) {
  if (s.size() != m.size()) {
    throw ShapeError("pearson: series lengths differ (" + std::to_string(s.size()) + " vs " +
                     std::to_string(m.size()) + ")");
  }
  if (s.size() < 2) throw ShapeError("pearson: need at least two points");
  const double n = static_cast<double>(s.size());
  double mu_s = 0.0, mu_m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    mu_s += s[i];
    mu_m += m[i];
  }
  mu_s /= n;
  mu_m /= n;
  double cov = 0.0, var_s = 0.0, var_m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ds = s[i] - mu_s, dm = m[i] - mu_m;
    cov += ds * dm;
    var_s += ds * ds;
    var_m += dm * dm;
  }
  const double sd_s = std::sqrt(var_s / n), sd_m = std::sqrt(var_m / n);
  if (!(sd_s > kMinStdDev) || !(sd_m > kMinStdDev)) {
    throw ZeroVarianceError("pearson: constant series (std " + format_double(sd_s) + ", " +
                            format_double(sd_m) + ")");
  }
  const double rho = (cov / n) / (sd_s * sd_m);
  return std::clamp(rho, -1.0, 1.0);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError(where + ": '" + s + "' is not a finite number");
  }
  return v;
}

}  // namespace

std::vector<MetricSeries> parse_metric_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricSeries> metrics;
  bool header = false;
  std::set<int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "metrics line " + std::to_string(line_no);
    if (!header) {
      if (fields.size() < 2 || fields[0] != "phase") {
        throw FormatError(where + ": header must start with 'phase' followed by metric names");
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty()) throw FormatError(where + ": empty metric name");
        metrics.push_back(MetricSeries{fields[i], {}, {}});
      }
      header = true;
      continue;
    }
    if (fields.size() != metrics.size() + 1) {
      throw FormatError(where + ": expected " + std::to_string(metrics.size() + 1) + " fields");
    }
    const double phase_v = parse_number(fields[0], where);
    const int phase = static_cast<int>(phase_v);
    if (static_cast<double>(phase) != phase_v) throw FormatError(where + ": phase must be an integer");
    if (!seen.insert(phase).second) throw FormatError(where + ": duplicate phase " + fields[0]);
    if (!metrics.empty() && !metrics[0].phases.empty() && phase < metrics[0].phases.back()) {
      throw FormatError(where + ": phases must be increasing");
    }
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      metrics[i].phases.push_back(phase);
      metrics[i].values.push_back(parse_number(fields[i + 1], where));
    }
  }
  if (!header) throw FormatError("metrics file has no header");
  return metrics;
}

std::vector<MetricSeries> load_metric_csv(const std::filesystem::path& path) {
  return parse_metric_csv(read_text_file(path));
}

std::string metric_csv(const std::vector<MetricSeries>& metrics) {
  if (metrics.empty()) throw ConfigError("no metric series to write");
  std::string out = "phase";
  for (const auto& m : metrics) out += "," + m.name;
  out += "\n";
  for (std::size_t r = 0; r < metrics[0].phases.size(); ++r) {
    out += std::to_string(metrics[0].phases[r]);
    for (const auto& m : metrics) {
      if (m.phases != metrics[0].phases) throw PhaseMismatchError("metric series disagree on phases");
      out += "," + format_double(m.values[r]);
    }
    out += "\n";
  }
  return out;
}

SeriesReport build_report(const SimilaritySeries& series, const std::vector<MetricSeries>& metrics,
                          const ReportMeta& meta) {
  const std::vector<int> phases = series.phase_indices();
  SeriesReport report{series, {}, meta};
  for (const auto& m : metrics) {
    if (m.phases != phases) {
      throw PhaseMismatchError("metric '" + m.name + "' covers " + std::to_string(m.phases.size()) +
                               " phases but the similarity series covers " +
                               std::to_string(phases.size()));
    }
    report.rho.emplace_back(m.name, pearson(series.means(), m.values));
  }
  return report;
}

json SeriesReport::to_json() const {
  json rho_obj = json::object();
  for (const auto& [name, r] : rho) rho_obj[name] = r;
  json counts = json::array();
  for (const auto& p : series.phases) counts.push_back(p.samples);
  return json{{"module_tag", series.module_tag},
              {"space", space_name(meta.space)},
              {"phases", series.phase_indices()},
              {"mean_scores", series.means()},
              {"sample_counts", counts},
              {"rho", rho_obj},
              {"aggregation", meta.space == Space::k2d ? "mean-of-per-camera-cosines" : "cosine"},
              {"embedding_source", meta.embedding_source},
              {"embedding_model", meta.embedding_model},
              {"config_digest", meta.config_digest}};
}

std::string SeriesReport::to_csv(const std::vector<MetricSeries>& metrics) const {
  std::string out = "phase,mean_score";
  for (const auto& m : metrics) out += "," + m.name;
  out += "\n";
  for (std::size_t i = 0; i < series.phases.size(); ++i) {
    out += std::to_string(series.phases[i].phase) + "," + format_double(series.phases[i].mean_score);
    for (const auto& m : metrics) out += "," + format_double(m.values.at(i));
    out += "\n";
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace respace
