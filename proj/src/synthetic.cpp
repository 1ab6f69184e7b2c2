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

#include "respace/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "respace/errors.hpp"
#include "respace/io.hpp"
#include "respace/rng.hpp"

namespace respace {

using nlohmann::json;

namespace {

const char* const kCategories[] = {"car",     "truck",        "bus",     "trailer",
                                   "construction_vehicle", "pedestrian", "motorcycle",
                                   "bicycle", "traffic_cone", "barrier"};
constexpr std::size_t kNumCategories = sizeof(kCategories) / sizeof(kCategories[0]);

void scale_to_unit_rms(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double rms = std::sqrt(ss / static_cast<double>(v.size()));
  if (!(rms > 0.0)) throw DegenerateVectorError("cannot scale a zero tensor to unit RMS");
  for (double& x : v) x /= rms;
}

std::vector<double> unit_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  scale_to_unit_rms(v);
  return v;
}

}  // namespace

std::vector<double> SynthConfig::schedule() const {
  if (!alphas.empty()) return alphas;
  std::vector<double> out(n_phases);
  for (std::size_t p = 0; p < n_phases; ++p) {
    out[p] = n_phases == 1 ? 1.0 : static_cast<double>(p) / static_cast<double>(n_phases - 1);
  }
  return out;
}

void SynthConfig::validate() const {
  if (n_phases == 0) throw ConfigError("synth: n_phases must be >= 1");
  const auto a = schedule();
  if (a.size() != n_phases) throw ConfigError("synth: alphas must list one value per phase");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0 && a[i] <= 1.0)) throw ConfigError("synth: alphas must lie in [0,1]");
    if (i > 0 && !(a[i] > a[i - 1])) throw ConfigError("synth: alphas must be strictly increasing");
  }
  if (!(sigma >= 0.0)) throw ConfigError("synth: sigma must be >= 0");
  if (bev_shape.size() != 3) throw ConfigError("synth: bev_shape must be [C,H,W]");
  if (image_shape.size() != 4) throw ConfigError("synth: image_shape must be [Cam,C,H,W]");
  for (auto d : bev_shape) if (d == 0) throw ConfigError("synth: zero-sized bev_shape axis");
  for (auto d : image_shape) if (d == 0) throw ConfigError("synth: zero-sized image_shape axis");
  if (!(jitter >= 0.0)) throw ConfigError("synth: jitter must be >= 0");
}

json SynthConfig::to_json() const {
  return json{{"n_samples", n_samples}, {"n_phases", n_phases},  {"bev_shape", bev_shape},
              {"image_shape", image_shape}, {"alphas", schedule()}, {"sigma", sigma},
              {"seed", seed},           {"module_tag", module_tag}, {"map_lo", map_lo},
              {"map_hi", map_hi},       {"nds_lo", nds_lo},      {"nds_hi", nds_hi},
              {"jitter", jitter}};
}

SynthConfig SynthConfig::from_json(const json& j, SynthConfig c) {
  try {
    if (j.contains("n_samples")) c.n_samples = j["n_samples"].get<std::size_t>();
    if (j.contains("n_phases")) c.n_phases = j["n_phases"].get<std::size_t>();
    if (j.contains("bev_shape")) c.bev_shape = j["bev_shape"].get<Shape>();
    if (j.contains("image_shape")) c.image_shape = j["image_shape"].get<Shape>();
    if (j.contains("alphas")) c.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("module_tag")) c.module_tag = j["module_tag"].get<std::string>();
    if (j.contains("map_lo")) c.map_lo = j["map_lo"].get<double>();
    if (j.contains("map_hi")) c.map_hi = j["map_hi"].get<double>();
    if (j.contains("nds_lo")) c.nds_lo = j["nds_lo"].get<double>();
    if (j.contains("nds_hi")) c.nds_hi = j["nds_hi"].get<double>();
    if (j.contains("jitter")) c.jitter = j["jitter"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SynthConfig SynthConfig::from_json(const json& j) { return from_json(j, SynthConfig{}); }

std::vector<GTScene> gen_scenes(const SynthConfig& config) {
  config.validate();
  std::vector<GTScene> scenes;
  const int cameras = static_cast<int>(config.cameras());
  for (std::size_t s = 0; s < config.n_samples; ++s) {
    Rng rng(derive_seed(config.seed, fnv1a64("scenes"), s));
    char id[32];
    std::snprintf(id, sizeof id, "synthetic-%04zu", s);
    GTScene scene{id, cameras, {}, {}};
    const std::size_t n = 1 + rng.index(6);
    for (std::size_t i = 0; i < n; ++i) {
      Box3D b;
      b.category = kCategories[rng.index(kNumCategories)];
      b.x = rng.uniform(-50.0, 50.0);
      b.y = rng.uniform(-50.0, 50.0);
      b.z = rng.uniform(-3.0, 1.0);
      b.l = rng.uniform(0.5, 12.0);
      b.w = rng.uniform(0.5, 3.0);
      b.h = rng.uniform(0.5, 4.0);
      b.yaw = std::numbers::pi - rng.uniform() * 2.0 * std::numbers::pi;  // (-pi, pi]
      b.vx = rng.uniform(-10.0, 10.0);
      b.vy = rng.uniform(-10.0, 10.0);
      scene.boxes3d.push_back(b);
      Box2D b2;
      b2.category = b.category;
      b2.camera_id = static_cast<int>(rng.index(static_cast<std::size_t>(cameras)));
      b2.cx = rng.uniform(0.05, 0.95);
      b2.cy = rng.uniform(0.05, 0.95);
      b2.bw = rng.uniform(0.02, 0.5);
      b2.bh = rng.uniform(0.02, 0.5);
      scene.boxes2d.push_back(b2);
    }
    validate_scene(scene);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<FeatureMap> gen_features(const SynthConfig& config, Space space,
                                     const std::vector<GTScene>& scenes,
                                     const GTRepresentations& gt_reps) {
  config.validate();
  const Shape shape = config.feature_shape(space);
  const std::size_t views = space == Space::k2d ? shape[0] : 1;
  const std::size_t view_size = shape_numel(shape) / views;
  const std::vector<double> alphas = config.schedule();

  // One projection from the representation space to a feature view, shared
  // by all samples and cameras.
  std::size_t rep_dim = 0;
  for (const auto& sc : scenes) {
    auto it = gt_reps.find(sc.sample_id);
    if (it == gt_reps.end()) {
      throw MissingDataError("gen_features: no GT representation for '" + sc.sample_id + "'");
    }
    if (it->second.rows != views) {
      throw ShapeError("gen_features: '" + sc.sample_id + "' has " + std::to_string(it->second.rows) +
                       " representation rows, feature shape needs " + std::to_string(views));
    }
    rep_dim = it->second.dim;
  }
  std::vector<double> projection(view_size * rep_dim);
  {
    Rng rng(derive_seed(config.seed, fnv1a64("projection")));
    const double scale = 1.0 / std::sqrt(static_cast<double>(rep_dim == 0 ? 1 : rep_dim));
    for (double& v : projection) v = rng.normal() * scale;
  }

  // Per-view set mean, subtracted before projecting. A lone sample keeps
  // its raw representation.
  std::vector<double> mean(views * rep_dim, 0.0);
  if (scenes.size() > 1) {
    for (const auto& sc : scenes) {
      const auto& vals = gt_reps.at(sc.sample_id).values;
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += vals[k];
    }
    for (double& m : mean) m /= static_cast<double>(scenes.size());
  }
  std::vector<std::vector<double>> targets;
  for (const auto& sc : scenes) {
    const Representation& r = gt_reps.at(sc.sample_id);
    std::vector<double> t(view_size * views, 0.0);
    for (std::size_t v = 0; v < views; ++v) {
      const auto row = r.row(v);
      const double* mrow = mean.data() + v * rep_dim;
      for (std::size_t i = 0; i < view_size; ++i) {
        double acc = 0.0;
        const double* prow = projection.data() + i * rep_dim;
        for (std::size_t k = 0; k < rep_dim; ++k) acc += prow[k] * (row[k] - mrow[k]);
        t[v * view_size + i] = acc;
      }
    }
    scale_to_unit_rms(t);
    targets.push_back(std::move(t));
  }

  std::vector<FeatureMap> out;
  const std::size_t n = view_size * views;
  for (std::size_t p = 0; p < config.n_phases; ++p) {
    const double a = alphas[p];
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      const std::uint64_t idx = (static_cast<std::uint64_t>(s) << 20) | p;
      const auto eps = unit_noise(n, derive_seed(config.seed, fnv1a64("eps"), idx));
      const auto eta = unit_noise(n, derive_seed(config.seed, fnv1a64("eta"), idx));
      std::vector<double> f(n);
      for (std::size_t i = 0; i < n; ++i) {
        f[i] = a * targets[s][i] + (1.0 - a) * eps[i] + config.sigma * eta[i];
      }
      out.push_back(FeatureMap{scenes[s].sample_id, static_cast<int>(p + 1), config.module_tag,
                               Tensor(shape, std::move(f))});
    }
  }
  return out;
}

std::vector<MetricSeries> gen_metric_series(const SynthConfig& config) {
  config.validate();
  const auto alphas = config.schedule();
  MetricSeries map{"mAP", {}, {}}, nds{"NDS", {}, {}};
  Rng rng_map(derive_seed(config.seed, fnv1a64("metric-mAP")));
  Rng rng_nds(derive_seed(config.seed, fnv1a64("metric-NDS")));
  for (std::size_t p = 0; p < config.n_phases; ++p) {
    const double a = alphas[p];
    map.phases.push_back(static_cast<int>(p + 1));
    nds.phases.push_back(static_cast<int>(p + 1));
    map.values.push_back(config.map_lo + (config.map_hi - config.map_lo) * a +
                         config.jitter * rng_map.uniform(-1.0, 1.0));
    nds.values.push_back(config.nds_lo + (config.nds_hi - config.nds_lo) * a +
                         config.jitter * rng_nds.uniform(-1.0, 1.0));
  }
  return {map, nds};
}

}  // namespace respace
