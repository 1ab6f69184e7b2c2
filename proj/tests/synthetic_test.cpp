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

#include <gtest/gtest.h>

#include <cmath>

#include "respace/errors.hpp"
#include "respace/gt.hpp"
#include "respace/io.hpp"
#include "respace/rng.hpp"
#include "respace/synthetic.hpp"

using namespace respace;

namespace {

SynthConfig small(std::uint64_t seed = 4) {
  SynthConfig c;
  c.n_samples = 5;
  c.n_phases = 4;
  c.bev_shape = {4, 3, 3};
  c.image_shape = {2, 3, 2, 3};
  c.seed = seed;
  return c;
}

GTRepresentations embed_all(const std::vector<GTScene>& scenes, Space space) {
  HashEmbedder emb;
  GTRepresentations reps;
  for (const auto& s : scenes) reps.emplace(s.sample_id, embed_scene(s, space, emb));
  return reps;
}

// Rebuilds a target tensor from the documented recipe: Gaussian projection
// rows seeded from "projection", scaled 1/sqrt(dim), applied to the
// representation minus the per-row set mean, then unit RMS.
std::vector<double> reference_target(const SynthConfig& c, Space space, const GTRepresentations& reps,
                                     const std::string& id) {
  const Shape shape = c.feature_shape(space);
  const std::size_t views = space == Space::k2d ? shape[0] : 1;
  const std::size_t view_size = shape_numel(shape) / views;
  const std::size_t dim = kReSpaceDim;
  std::vector<double> proj(view_size * dim);
  Rng rng(derive_seed(c.seed, fnv1a64("projection")));
  for (double& v : proj) v = rng.normal() / std::sqrt(static_cast<double>(dim));
  std::vector<double> mean(views * dim, 0.0);
  for (const auto& [k, r] : reps)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.values[i] / static_cast<double>(reps.size());
  const auto& r = reps.at(id);
  std::vector<double> t;
  for (std::size_t v = 0; v < views; ++v)
    for (std::size_t i = 0; i < view_size; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += proj[i * dim + k] * (r.values[v * dim + k] - mean[v * dim + k]);
      t.push_back(acc);
    }
  double ss = 0.0;
  for (double x : t) ss += x * x;
  const double rms = std::sqrt(ss / static_cast<double>(t.size()));
  for (double& x : t) x /= rms;
  return t;
}

}  // namespace

TEST(SynthScenes, DeterministicAndValid) {
  const auto c = small();
  const auto a = gen_scenes(c), b = gen_scenes(c);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(gt_to_json(a), gt_to_json(b));
  for (const auto& s : a) {
    EXPECT_NO_THROW(validate_scene(s));
    EXPECT_GE(s.boxes3d.size(), 1u);
    EXPECT_LE(s.boxes3d.size(), 6u);
    EXPECT_EQ(s.cameras, 2);
  }
  EXPECT_NE(gt_to_json(gen_scenes(small(5))), gt_to_json(a));
}

TEST(SynthScenes, ZeroSamplesIsEmpty) {
  auto c = small();
  c.n_samples = 0;
  EXPECT_TRUE(gen_scenes(c).empty());
  EXPECT_TRUE(gen_features(c, Space::k3d, {}, {}).empty());
}

TEST(SynthFeatures, OrderAndShapes) {
  const auto c = small();
  const auto scenes = gen_scenes(c);
  for (Space space : {Space::k3d, Space::k2d}) {
    const auto f = gen_features(c, space, scenes, embed_all(scenes, space));
    ASSERT_EQ(f.size(), 20u);
    EXPECT_EQ(f[0].phase, 1);
    EXPECT_EQ(f[19].phase, 4);
    EXPECT_EQ(f[6].sample_id, scenes[1].sample_id);
    EXPECT_EQ(f[0].features.shape(), c.feature_shape(space));
  }
}

TEST(SynthFeatures, FinalPhaseIsTargetWhenNoiseless) {
  auto c = small();
  c.sigma = 0.0;
  const auto scenes = gen_scenes(c);
  for (Space space : {Space::k3d, Space::k2d}) {
    const auto reps = embed_all(scenes, space);
    const auto f = gen_features(c, space, scenes, reps);
    for (const auto& m : f) {
      if (m.phase != 4) continue;
      const auto t = reference_target(c, space, reps, m.sample_id);
      for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(m.features[i], t[i], 1e-12);
    }
  }
}

TEST(SynthFeatures, FirstPhaseIgnoresGT) {
  auto c = small();
  c.sigma = 0.0;
  const auto scenes = gen_scenes(c);
  const auto reps = embed_all(scenes, Space::k3d);
  auto other = reps;
  for (auto& [id, r] : other) std::reverse(r.values.begin(), r.values.end());
  const auto a = gen_features(c, Space::k3d, scenes, reps);
  const auto b = gen_features(c, Space::k3d, scenes, other);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].phase == 1) EXPECT_EQ(a[i].features, b[i].features);
    else EXPECT_NE(a[i].features, b[i].features);
  }
}

TEST(SynthFeatures, DeterministicInSeed) {
  const auto c = small();
  const auto scenes = gen_scenes(c);
  const auto reps = embed_all(scenes, Space::k2d);
  const auto a = gen_features(c, Space::k2d, scenes, reps);
  const auto b = gen_features(c, Space::k2d, scenes, reps);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].features, b[i].features);
}

TEST(SynthFeatures, MissingRepresentation) {
  const auto c = small();
  const auto scenes = gen_scenes(c);
  auto reps = embed_all(scenes, Space::k3d);
  reps.erase(scenes[2].sample_id);
  try {
    gen_features(c, Space::k3d, scenes, reps);
    FAIL();
  } catch (const MissingDataError& e) {
    EXPECT_NE(std::string(e.what()).find(scenes[2].sample_id), std::string::npos);
  }
  EXPECT_THROW(gen_features(c, Space::k2d, scenes, embed_all(scenes, Space::k3d)), ShapeError);
}

TEST(SynthMetrics, AffineWithoutJitter) {
  auto c = small();
  c.jitter = 0.0;
  c.alphas = {0.0, 0.1, 0.5, 1.0};
  const auto m = gen_metric_series(c);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].name, "mAP");
  EXPECT_EQ(m[1].name, "NDS");
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_DOUBLE_EQ(m[0].values[p], c.map_lo + (c.map_hi - c.map_lo) * c.alphas[p]);
    EXPECT_DOUBLE_EQ(m[1].values[p], c.nds_lo + (c.nds_hi - c.nds_lo) * c.alphas[p]);
  }
}

TEST(SynthMetrics, MonotoneAndReproducible) {
  const SynthConfig c;
  const auto a = gen_metric_series(c);
  EXPECT_EQ(a, gen_metric_series(c));
  for (const auto& m : a) {
    EXPECT_EQ(m.phases, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}));
    for (std::size_t p = 1; p < m.values.size(); ++p) EXPECT_GT(m.values[p], m.values[p - 1]);
  }
}

TEST(SynthConfig, ScheduleAndValidation) {
  SynthConfig c;
  const auto a = c.schedule();
  ASSERT_EQ(a.size(), 8u);
  EXPECT_EQ(a.front(), 0.0);
  EXPECT_EQ(a.back(), 1.0);
  c.alphas = {0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  EXPECT_THROW(c.validate(), ConfigError);
  c.alphas = {0.1, 0.2};
  EXPECT_THROW(c.validate(), ConfigError);
  c.alphas.clear();
  c.sigma = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SynthConfig, JsonRoundTrip) {
  auto c = small(9);
  c.alphas = {0.0, 0.2, 0.7, 1.0};
  const auto back = SynthConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(SynthConfig::from_json(nlohmann::json{{"n_samples", "many"}}), ConfigError);
}
