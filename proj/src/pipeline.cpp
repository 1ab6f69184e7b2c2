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

#include "respace/pipeline.hpp"

#include <cstdio>
#include <set>

#include "respace/checkpoint.hpp"
#include "respace/errors.hpp"
#include "respace/gt.hpp"
#include "respace/io.hpp"

namespace respace {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxListedIds = 10;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string id_list(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kMaxListedIds; ++i) {
    out += (i ? ", " : "") + ids[i];
  }
  if (ids.size() > kMaxListedIds) out += ", ... (" + std::to_string(ids.size() - kMaxListedIds) + " more)";
  return out;
}

fs::path or_default(const std::string& p, const fs::path& out, const char* name) {
  return p.empty() ? out / name : fs::path(p);
}

std::string scores_csv(const std::vector<SampleScore>& scores) {
  std::string out = "sample_id,phase,score\n";
  for (const auto& s : scores) {
    out += s.sample_id + "," + std::to_string(s.phase) + "," + format_double(s.score) + "\n";
  }
  return out;
}

FeatureDataset read_checked(const fs::path& dir, Space space) {
  FeatureDataset ds = read_feature_dataset(dir);
  if (ds.space != space) {
    throw ConfigError("feature dataset '" + dir.string() + "' is space " + space_name(ds.space) +
                      ", config says " + space_name(space));
  }
  return ds;
}

void gen_synth(const PipelineConfig& config) {
  SynthConfig sc = config.synthetic;
  sc.seed = config.require_seed("gen-synth");
  sc.module_tag = config.module_tag;
  const auto scenes = gen_scenes(sc);
  if (scenes.empty()) throw ConfigError("gen-synth: n_samples must be >= 1");
  HashEmbedder embedder;
  GTRepresentations reps;
  for (const auto& s : scenes) reps.emplace(s.sample_id, embed_scene(s, config.space, embedder));
  auto maps = gen_features(sc, config.space, scenes, reps);
  write_gt_file(config.gt_path(), scenes);
  write_feature_dataset(config.features_path(),
                        FeatureDataset::from_maps(sc.module_tag, config.space, std::move(maps)));
  write_text_file(config.metrics_path(), metric_csv(gen_metric_series(sc)));
}

void embed(const PipelineConfig& config) {
  const auto scenes = parse_gt_file(config.gt_path());
  HashEmbedder embedder;
  std::vector<Representation> reps;
  for (const auto& s : scenes) reps.push_back(embed_scene(s, config.space, embedder));
  const fs::path dst = config.embeddings_path().empty() ? config.out_dir() / "embeddings.jsonl"
                                                        : config.embeddings_path();
  write_embeddings(dst, reps);
}

void train(const PipelineConfig& config) {
  const std::uint64_t seed = config.require_seed("train");
  std::vector<FeatureDataset> sets;
  sets.push_back(read_checked(config.features_path(), config.space));
  for (const auto& p : config.paths.pool) {
    sets.push_back(read_checked(p, config.space));
    if (sets.back().shape != sets.front().shape) {
      throw ShapeError("pooled dataset '" + p + "' has shape " + shape_to_string(sets.back().shape) +
                       ", expected " + shape_to_string(sets.front().shape));
    }
  }
  ReportMeta meta;
  const GTRepresentations reps = load_gt_representations(config, meta);
  std::vector<std::string> ids;
  std::vector<FeatureMap> data;
  for (auto& ds : sets) {
    ids.insert(ids.end(), ds.sample_ids.begin(), ds.sample_ids.end());
    for (auto& m : ds.maps) data.push_back(std::move(m));
  }
  check_coverage(ids, reps);
  AEConfig ae = config.ae_config(sets.front().shape);
  ae.seed = seed;
  const TrainResult result = train_two_stage(ae, data, reps);
  write_checkpoint(config.checkpoint_path(), ae, result.params);
  json report = result.report.to_json();
  report["config_digest"] = digest_hex(ae.digest());
  report["samples"] = data.size();
  write_text_file(config.out_dir() / "train_report.json", report.dump(1) + "\n");
}

void score(const PipelineConfig& config) {
  const FeatureDataset ds = read_checked(config.features_path(), config.space);
  const Checkpoint ck = read_checkpoint(config.checkpoint_path());
  const AEConfig expected = config.ae_config(ds.shape);
  if (expected.architecture_digest() != ck.config.architecture_digest()) {
    throw DigestMismatchError("checkpoint '" + config.checkpoint_path().string() + "' architecture " +
                              digest_hex(ck.config.architecture_digest()) + " does not match dataset shape " +
                              shape_to_string(ds.shape) + " (expects " +
                              digest_hex(expected.architecture_digest()) + ")");
  }
  ReportMeta meta;
  const GTRepresentations reps = load_gt_representations(config, meta);
  check_coverage(ds.sample_ids, reps);
  meta.config_digest = digest_hex(ck.digest);

  std::vector<SampleScore> scores;
  for (const auto& m : ds.maps) {
    scores.push_back({m.sample_id, m.phase, similarity_score(encode(ck.config, ck.params, m), reps.at(m.sample_id))});
  }
  const SimilaritySeries series = aggregate_phases(scores, ds.module_tag, ds.phases);
  std::sort(scores.begin(), scores.end(), [](const SampleScore& a, const SampleScore& b) {
    return std::pair(a.phase, a.sample_id) < std::pair(b.phase, b.sample_id);
  });
  write_text_file(config.out_dir() / "scores.csv", scores_csv(scores));
  write_text_file(config.series_path(), SeriesFile{series, meta}.to_json().dump(1) + "\n");
}

SeriesReport correlate(const PipelineConfig& config) {
  json j;
  try {
    j = json::parse(read_text_file(config.series_path()));
  } catch (const json::parse_error& e) {
    throw FormatError(config.series_path().string() + ": " + e.what());
  }
  const SeriesFile sf = SeriesFile::from_json(j);
  const auto metrics = load_metric_csv(config.metrics_path());
  const SeriesReport report = build_report(sf.series, metrics, sf.meta);
  write_text_file(config.out_dir() / "report.json", report.to_json().dump(1) + "\n");
  write_text_file(config.out_dir() / "report.csv", report.to_csv(metrics));
  return report;
}

}  // namespace

json PipelineConfig::to_json() const {
  json p{{"out", paths.out},         {"gt", paths.gt},           {"features", paths.features},
         {"embeddings", paths.embeddings}, {"metrics", paths.metrics}, {"checkpoint", paths.checkpoint},
         {"series", paths.series},   {"pool", paths.pool}};
  json t{{"hidden_channels", train.hidden_channels}, {"stage1_epochs", train.stage1_epochs},
         {"stage1_lr", train.stage1_lr},             {"stage2_epochs", train.stage2_epochs},
         {"stage2_lr", train.stage2_lr},             {"batch_size", train.batch_size},
         {"momentum", train.momentum}};
  json j{{"module_tag", module_tag}, {"space", space_name(space)}, {"paths", p}, {"train", t},
         {"synthetic", synthetic.to_json()}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  reject_unknown(j, {"seed", "module_tag", "space", "paths", "train", "synthetic"}, "config");
  PipelineConfig c;
  if (j.contains("seed") && !j.at("seed").is_null()) {
    std::uint64_t s = 0;
    read_opt(j, "seed", s, "config");
    c.seed = s;
  }
  read_opt(j, "module_tag", c.module_tag, "config");
  if (j.contains("space")) {
    std::string s;
    read_opt(j, "space", s, "config");
    c.space = parse_space(s);
  }
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    reject_unknown(p, {"out", "gt", "features", "embeddings", "metrics", "checkpoint", "series", "pool"},
                   "config.paths");
    read_opt(p, "out", c.paths.out, "paths");
    read_opt(p, "gt", c.paths.gt, "paths");
    read_opt(p, "features", c.paths.features, "paths");
    read_opt(p, "embeddings", c.paths.embeddings, "paths");
    read_opt(p, "metrics", c.paths.metrics, "paths");
    read_opt(p, "checkpoint", c.paths.checkpoint, "paths");
    read_opt(p, "series", c.paths.series, "paths");
    read_opt(p, "pool", c.paths.pool, "paths");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"hidden_channels", "stage1_epochs", "stage1_lr", "stage2_epochs", "stage2_lr",
                       "batch_size", "momentum"},
                   "config.train");
    read_opt(t, "hidden_channels", c.train.hidden_channels, "train");
    read_opt(t, "stage1_epochs", c.train.stage1_epochs, "train");
    read_opt(t, "stage1_lr", c.train.stage1_lr, "train");
    read_opt(t, "stage2_epochs", c.train.stage2_epochs, "train");
    read_opt(t, "stage2_lr", c.train.stage2_lr, "train");
    read_opt(t, "batch_size", c.train.batch_size, "train");
    read_opt(t, "momentum", c.train.momentum, "train");
  }
  if (j.contains("synthetic")) c.synthetic = SynthConfig::from_json(j.at("synthetic"), c.synthetic);
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

fs::path PipelineConfig::gt_path() const { return or_default(paths.gt, out_dir(), "gt.json"); }
fs::path PipelineConfig::features_path() const { return or_default(paths.features, out_dir(), "features"); }
fs::path PipelineConfig::embeddings_path() const {
  if (paths.embeddings == "builtin") return {};
  return or_default(paths.embeddings, out_dir(), "embeddings.jsonl");
}
fs::path PipelineConfig::metrics_path() const { return or_default(paths.metrics, out_dir(), "metrics.csv"); }
fs::path PipelineConfig::checkpoint_path() const {
  return or_default(paths.checkpoint, out_dir(), "checkpoint.aeck");
}
fs::path PipelineConfig::series_path() const {
  return or_default(paths.series, out_dir(), "similarity_series.json");
}

std::uint64_t PipelineConfig::require_seed(const std::string& command) const {
  if (!seed) throw ConfigError(command + " requires --seed");
  return *seed;
}

AEConfig PipelineConfig::ae_config(const Shape& shape) const {
  AEConfig c;
  if (shape.size() == 3) {
    c = AEConfig::for_input(shape[0], shape[1], shape[2], 0, kReSpaceDim, train.hidden_channels);
  } else if (shape.size() == 4) {
    c = AEConfig::for_input(shape[1], shape[2], shape[3], shape[0], kReSpaceDim, train.hidden_channels);
  } else {
    throw ShapeError("feature shape " + shape_to_string(shape) + " is neither [C,H,W] nor [Cam,C,H,W]");
  }
  c.stage1_epochs = train.stage1_epochs;
  c.stage1_lr = train.stage1_lr;
  c.stage2_epochs = train.stage2_epochs;
  c.stage2_lr = train.stage2_lr;
  c.batch_size = train.batch_size;
  c.momentum = train.momentum;
  if (seed) c.seed = *seed;
  return c;
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".respace.lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw IoError("output directory '" + dir.string() + "' is locked by another run (remove " +
                  path_.string() + " if stale)");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void check_coverage(const std::vector<std::string>& feature_ids, const GTRepresentations& reps) {
  const std::set<std::string> have(feature_ids.begin(), feature_ids.end());
  std::vector<std::string> no_gt, no_features;
  for (const auto& id : have) {
    if (!reps.count(id)) no_gt.push_back(id);
  }
  for (const auto& [id, r] : reps) {
    if (!have.count(id)) no_features.push_back(id);
  }
  if (!no_gt.empty()) {
    throw MissingDataError(std::to_string(no_gt.size()) + " feature sample(s) without GT representation: " +
                           id_list(no_gt));
  }
  if (!no_features.empty()) {
    throw MissingDataError(std::to_string(no_features.size()) + " GT sample(s) without features: " +
                           id_list(no_features));
  }
}

GTRepresentations load_gt_representations(const PipelineConfig& config, ReportMeta& meta) {
  GTRepresentations reps;
  meta.space = config.space;
  const fs::path file = config.embeddings_path();
  if (file.empty()) {
    HashEmbedder embedder;
    for (const auto& s : parse_gt_file(config.gt_path())) {
      reps.emplace(s.sample_id, embed_scene(s, config.space, embedder));
    }
    meta.embedding_source = embedder.source();
    meta.embedding_model = embedder.model();
    return reps;
  }
  for (auto& [key, r] : load_external_embeddings(file)) {
    if (key.second != config.space) continue;
    if (reps.empty()) {
      meta.embedding_source = r.source;
      meta.embedding_model = r.model;
    } else if (r.model != meta.embedding_model) {
      throw FormatError(file.string() + ": mixed embedding models '" + meta.embedding_model + "' and '" +
                        r.model + "'");
    }
    reps.emplace(key.first, std::move(r));
  }
  if (reps.empty()) {
    throw MissingDataError(file.string() + ": no " + space_name(config.space) + " records");
  }
  return reps;
}

json SeriesFile::to_json() const {
  json phases = json::array();
  for (const auto& p : series.phases) {
    phases.push_back({{"phase", p.phase}, {"mean_score", p.mean_score}, {"samples", p.samples}});
  }
  return json{{"module_tag", series.module_tag},
              {"space", space_name(meta.space)},
              {"phases", phases},
              {"embedding_source", meta.embedding_source},
              {"embedding_model", meta.embedding_model},
              {"config_digest", meta.config_digest}};
}

SeriesFile SeriesFile::from_json(const json& j) {
  SeriesFile f;
  try {
    f.series.module_tag = j.at("module_tag").get<std::string>();
    f.meta.space = parse_space(j.at("space").get<std::string>());
    for (const auto& p : j.at("phases")) {
      f.series.phases.push_back({p.at("phase").get<int>(), p.at("mean_score").get<double>(),
                                 p.at("samples").get<std::size_t>()});
    }
    f.meta.embedding_source = j.at("embedding_source").get<std::string>();
    f.meta.embedding_model = j.at("embedding_model").get<std::string>();
    f.meta.config_digest = j.at("config_digest").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("similarity series: ") + e.what());
  }
  return f;
}

void cmd_gen_synth(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  gen_synth(config);
}

void cmd_embed(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  embed(config);
}

void cmd_train(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  train(config);
}

void cmd_score(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  score(config);
}

SeriesReport cmd_correlate(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  return correlate(config);
}

SeriesReport cmd_run_all(const PipelineConfig& config) {
  OutputLock lock(config.out_dir());
  if (config.paths.features.empty()) gen_synth(config);
  if (config.paths.embeddings.empty()) embed(config);
  train(config);
  score(config);
  return correlate(config);
}

}  // namespace respace
