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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "respace/autoencoder.hpp"
#include "respace/dataset.hpp"
#include "respace/embedding.hpp"
#include "respace/scoring.hpp"
#include "respace/synthetic.hpp"

namespace respace {

// Input and output locations. Empty input paths default to the artifact of
// the producing command inside `out`.
struct PipelinePaths {
  std::string out = "out";
  std::string gt;          // default <out>/gt.json
  std::string features;    // default <out>/features
  std::string embeddings;  // default <out>/embeddings.jsonl; "builtin" embeds GT on the fly
  std::string metrics;     // default <out>/metrics.csv
  std::string checkpoint;  // default <out>/checkpoint.aeck
  std::string series;      // default <out>/similarity_series.json
  std::vector<std::string> pool;  // extra feature datasets pooled into training
};

// Autoencoder hyperparameters; the layer stack itself follows the dataset shape.
struct TrainSettings {
  std::vector<std::size_t> hidden_channels;  // empty: C/2, C/4, C/8
  std::size_t stage1_epochs = 12;
  double stage1_lr = 1e-3;
  std::size_t stage2_epochs = 6;
  double stage2_lr = 1e-4;
  std::size_t batch_size = 128;
  double momentum = 0.0;
};

struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  std::string module_tag = "synthetic";
  Space space = Space::k3d;
  PipelinePaths paths;
  TrainSettings train;
  SynthConfig synthetic;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  std::filesystem::path out_dir() const { return paths.out; }
  std::filesystem::path gt_path() const;
  std::filesystem::path features_path() const;
  std::filesystem::path embeddings_path() const;  // empty when builtin
  std::filesystem::path metrics_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path series_path() const;

  std::uint64_t require_seed(const std::string& command) const;
  // The autoencoder for a dataset of this shape under these settings.
  AEConfig ae_config(const Shape& feature_shape) const;
};

// Exclusive ownership of an output directory for one command.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Both directions of the sample/GT join; lists at most 10 ids per side.
void check_coverage(const std::vector<std::string>& feature_ids, const GTRepresentations& reps);

// GT representations for `space`: the interchange file when configured,
// otherwise the builtin embedder over the GT file.
GTRepresentations load_gt_representations(const PipelineConfig& config, ReportMeta& meta);

struct SeriesFile {
  SimilaritySeries series;
  ReportMeta meta;
  nlohmann::json to_json() const;
  static SeriesFile from_json(const nlohmann::json& j);
};

void cmd_gen_synth(const PipelineConfig& config);
void cmd_embed(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_score(const PipelineConfig& config);
SeriesReport cmd_correlate(const PipelineConfig& config);
// gen-synth runs first when no feature dataset is configured.
SeriesReport cmd_run_all(const PipelineConfig& config);

}  // namespace respace
