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

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "respace/errors.hpp"
#include "respace/pipeline.hpp"

using namespace respace;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, gt, features, embeddings, metrics, checkpoint, series, space, module_tag;
  std::vector<std::string> pool;
  std::optional<std::size_t> stage1_epochs, stage2_epochs, batch_size;
  std::optional<double> stage1_lr, stage2_lr, momentum;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "pipeline config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "seed for generation and training");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--gt", o.gt, "GT JSON file");
  cmd->add_option("--features", o.features, "feature dataset directory");
  cmd->add_option("--embeddings", o.embeddings, "embedding interchange file, or 'builtin'");
  cmd->add_option("--metrics", o.metrics, "metric CSV (phase,mAP,NDS)");
  cmd->add_option("--checkpoint", o.checkpoint, "autoencoder checkpoint");
  cmd->add_option("--series", o.series, "similarity series JSON");
  cmd->add_option("--space", o.space, "representation space")->check(CLI::IsMember({"2d", "3d"}));
  cmd->add_option("--module-tag", o.module_tag, "module tag for generated data");
}

void add_training(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--pool", o.pool, "extra feature datasets pooled into training");
  cmd->add_option("--stage1-epochs", o.stage1_epochs);
  cmd->add_option("--stage2-epochs", o.stage2_epochs);
  cmd->add_option("--stage1-lr", o.stage1_lr);
  cmd->add_option("--stage2-lr", o.stage2_lr);
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--momentum", o.momentum);
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
  if (o.seed) c.seed = o.seed;
  if (o.out) c.paths.out = *o.out;
  if (o.gt) c.paths.gt = *o.gt;
  if (o.features) c.paths.features = *o.features;
  if (o.embeddings) c.paths.embeddings = *o.embeddings;
  if (o.metrics) c.paths.metrics = *o.metrics;
  if (o.checkpoint) c.paths.checkpoint = *o.checkpoint;
  if (o.series) c.paths.series = *o.series;
  if (o.space) c.space = parse_space(*o.space);
  if (o.module_tag) c.module_tag = *o.module_tag;
  if (!o.pool.empty()) c.paths.pool = o.pool;
  if (o.stage1_epochs) c.train.stage1_epochs = *o.stage1_epochs;
  if (o.stage2_epochs) c.train.stage2_epochs = *o.stage2_epochs;
  if (o.stage1_lr) c.train.stage1_lr = *o.stage1_lr;
  if (o.stage2_lr) c.train.stage2_lr = *o.stage2_lr;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.momentum) c.train.momentum = *o.momentum;
  return c;
}

// Newlines to spaces.
std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void print_report(const SeriesReport& r) {
  for (const auto& p : r.series.phases) std::printf("phase %d  S=%.6f  (%zu samples)\n", p.phase, p.mean_score, p.samples);
  for (const auto& [name, rho] : r.rho) std::printf("rho %s %.6f\n", name.c_str(), rho);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"respace: feature-map maturity scoring against GT in a shared representation space"};
  app.require_subcommand(1);
  Overrides o;

  auto* gen = app.add_subcommand("gen-synth", "write a synthetic GT file, feature dataset and metric CSV");
  auto* emb = app.add_subcommand("embed", "embed GT with the builtin text embedder");
  auto* trn = app.add_subcommand("train", "two-stage autoencoder training");
  auto* scr = app.add_subcommand("score", "per-sample and per-phase similarity scores");
  auto* cor = app.add_subcommand("correlate", "Pearson correlation of the score series with metrics");
  auto* all = app.add_subcommand("run-all", "gen-synth (when no features are given), embed, train, score, correlate");
  for (auto* cmd : {gen, emb, trn, scr, cor, all}) add_common(cmd, o);
  for (auto* cmd : {trn, all}) add_training(cmd, o);
  for (auto* cmd : {gen, trn, all}) cmd->get_option("--seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: usage: %s\n", one_line(e.what()).c_str());
    return 2;
  }

  try {
    const PipelineConfig config = resolve(o);
    if (gen->parsed()) {
      cmd_gen_synth(config);
    } else if (emb->parsed()) {
      cmd_embed(config);
    } else if (trn->parsed()) {
      cmd_train(config);
    } else if (scr->parsed()) {
      cmd_score(config);
    } else if (cor->parsed()) {
      print_report(cmd_correlate(config));
    } else if (all->parsed()) {
      print_report(cmd_run_all(config));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), one_line(e.what()).c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", one_line(e.what()).c_str());
    return 1;
  }
  return 0;
}
