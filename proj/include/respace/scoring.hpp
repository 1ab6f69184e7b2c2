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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "respace/embedding.hpp"

namespace respace {

// Similarity Score S between a feature-map representation and its GT
// representation: the cosine for a single row (BEV space), the unweighted
// mean of per-camera cosines for the perspective space. Rescaling either
// side by a positive factor leaves S unchanged.
double similarity_score(const Representation& r_fm, const Representation& r_gt);

struct SampleScore {
  std::string sample_id;
  int phase = 0;
  double score = 0.0;
};

struct PhaseScore {
  int phase = 0;
  double mean_score = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const PhaseScore&, const PhaseScore&) = default;
};

struct SimilaritySeries {
  std::string module_tag;
  std::vector<PhaseScore> phases;  // strictly increasing phase index

  std::vector<int> phase_indices() const;
  std::vector<double> means() const;

  friend bool operator==(const SimilaritySeries&, const SimilaritySeries&) = default;
};

// Per-phase arithmetic mean; within a phase samples are summed in sorted
// sample_id order so the result does not depend on input order. Every phase
// in `expected_phases` must have at least one score (PhaseMismatchError
// otherwise); duplicate (sample, phase) pairs are a FormatError.
SimilaritySeries aggregate_phases(std::vector<SampleScore> scores, const std::string& module_tag,
                                  const std::vector<int>& expected_phases = {});

struct MetricSeries {
  std::string name;
  std::vector<int> phases;
  std::vector<double> values;

  friend bool operator==(const MetricSeries&, const MetricSeries&) = default;
};

inline constexpr double kMinStdDev = 1e-12;

// Pearson correlation with population moments and a two-pass mean.
// Throws ShapeError for unequal lengths or fewer than two points and
// ZeroVarianceError when either standard deviation is <= kMinStdDev.
double pearson(const std::vector<double>& s, const std::vector<double>& m);

// CSV with a required header whose first column is "phase" followed by one
// column per metric (typically "phase,mAP,NDS").
std::vector<MetricSeries> parse_metric_csv(const std::string& text);
std::vector<MetricSeries> load_metric_csv(const std::filesystem::path& path);
std::string metric_csv(const std::vector<MetricSeries>& metrics);

struct ReportMeta {
  Space space = Space::k3d;
  std::string embedding_source;
  std::string embedding_model;
  std::string config_digest;
};

struct SeriesReport {
  SimilaritySeries series;
  std::vector<std::pair<std::string, double>> rho;  // metric order as ingested
  ReportMeta meta;

  nlohmann::json to_json() const;
  // phase,mean_score,<metric>... one row per phase
  std::string to_csv(const std::vector<MetricSeries>& metrics) const;
};

// Correlates the series with every metric. Each metric must cover exactly
// the series' phases (PhaseMismatchError).
SeriesReport build_report(const SimilaritySeries& series, const std::vector<MetricSeries>& metrics,
                          const ReportMeta& meta);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace respace
