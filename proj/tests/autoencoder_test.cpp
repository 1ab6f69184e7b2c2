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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "checks.hpp"
#include "respace/autoencoder.hpp"
#include "respace/errors.hpp"
#include "respace/grad_check.hpp"
#include "respace/rng.hpp"
#include "respace/scoring.hpp"
#include "respace/synthetic.hpp"

using namespace respace;
using respace::testing::random_tensor;

namespace {

AEConfig tiny(std::size_t cameras = 0) {
  AEConfig c = AEConfig::for_input(3, 6, 6, cameras, 8, {4, 4, 4});
  c.seed = 17;
  return c;
}

Representation random_rep(const AEConfig& c, const std::string& id, Rng& rng) {
  Representation r(c.space(), id, c.views(), c.latent_dim);
  for (double& v : r.values) v = rng.uniform(-1, 1);
  return r;
}

std::vector<FeatureMap> random_dataset(const AEConfig& c, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureMap> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"s" + std::to_string(i), 1, "test", random_tensor(c.feature_shape(), rng)});
  }
  return out;
}

GTRepresentations random_reps(const AEConfig& c, const std::vector<FeatureMap>& data, std::uint64_t seed) {
  Rng rng(seed);
  GTRepresentations reps;
  for (const auto& f : data) reps.emplace(f.sample_id, random_rep(c, f.sample_id, rng));
  return reps;
}

void check_total_gradient(const AEConfig& c) {
  const auto r = respace::testing::check_total_loss_gradient(c, 5);
  EXPECT_EQ(r.coordinates_checked, init_params(c).parameter_count());
  EXPECT_LE(r.max_rel_error, 1e-4) << "coordinate " << r.worst_coordinate << " analytic "
                                   << r.analytic_at_worst << " numeric " << r.numeric_at_worst;
}

}  // namespace

TEST(AEConfig, DefaultShapesChain) {
  const AEConfig c = AEConfig::for_input(256, 25, 25);
  ASSERT_EQ(c.encoder.size(), 4u);
  ASSERT_EQ(c.decoder.size(), 4u);
  EXPECT_EQ(c.encoder[0].out_channels, 128u);
  EXPECT_EQ(c.encoder[3].kernel_h, 4u);
  EXPECT_EQ(c.encoder[3].out_channels, 768u);
  EXPECT_TRUE(c.decoder[3].transposed);
  EXPECT_EQ(c.decoder[3].out_channels, 256u);
}

TEST(AEConfig, JsonRoundTripKeepsDigest) {
  AEConfig c = tiny(2);
  c.momentum = 0.5;
  const AEConfig back = AEConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.digest(), c.digest());
}

TEST(AEConfig, ArchitectureDigestIgnoresSchedule) {
  AEConfig a = tiny(), b = tiny();
  b.stage1_lr = 0.5;
  b.seed = 99;
  EXPECT_EQ(a.architecture_digest(), b.architecture_digest());
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_NE(a.architecture_digest(), AEConfig::for_input(3, 6, 6, 0, 9, {4, 4, 4}).architecture_digest());
}

TEST(AEConfig, BrokenChainIsConfigError) {
  AEConfig c = tiny();
  c.encoder[1].in_channels = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(AEConfig::for_input(3, 6, 6, 0, 8, {4, 4}), ConfigError);
}

TEST(InitParams, DeterministicAndSeeded) {
  AEConfig c = tiny();
  EXPECT_EQ(init_params(c), init_params(c));
  AEConfig d = c;
  d.seed = c.seed + 1;
  EXPECT_NE(init_params(c), init_params(d));
}

TEST(InitParams, GlorotBoundsAndZeroBias) {
  const AEConfig c = tiny();
  const AEParams p = init_params(c);
  for (std::size_t i = 0; i < c.encoder.size(); ++i) {
    const auto& s = c.encoder[i];
    const double fan_in = static_cast<double>(s.in_channels * s.kernel_h * s.kernel_w);
    const double fan_out = static_cast<double>(s.out_channels * s.kernel_h * s.kernel_w);
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double w : p.encoder[i].weight.data()) EXPECT_LE(std::abs(w), a);
    for (double b : p.encoder[i].bias.data()) EXPECT_EQ(b, 0.0);
  }
}

TEST(Encode, PaperScaleShapes) {
  const AEConfig bev = AEConfig::for_input(256, 25, 25);
  Rng rng(1);
  const FeatureMap fb{"b", 1, "bev", random_tensor(bev.feature_shape(), rng)};
  const auto rb = encode(bev, init_params(bev), fb);
  EXPECT_EQ(rb.rows, 1u);
  EXPECT_EQ(rb.dim, 768u);
  EXPECT_EQ(rb.space, Space::k3d);

  const AEConfig img = AEConfig::for_input(256, 15, 25, 6);
  const AEParams pi = init_params(img);
  const FeatureMap fi{"i", 1, "img", random_tensor(img.feature_shape(), rng)};
  const auto ri = encode(img, pi, fi);
  EXPECT_EQ(ri.rows, 6u);
  EXPECT_EQ(ri.dim, 768u);
  EXPECT_EQ(ri.space, Space::k2d);
  EXPECT_EQ(decode(img, pi, ri).shape(), img.feature_shape());
}

TEST(Encode, WrongShapeIsShapeError) {
  const AEConfig c = tiny();
  EXPECT_THROW(encode(c, init_params(c), FeatureMap{"x", 1, "t", Tensor({3, 6, 5})}), ShapeError);
  EXPECT_THROW(decode_view(c, init_params(c), std::vector<double>(7, 1.0)), ShapeError);
}

TEST(Encode, ZeroInputGivesZeroLatentAndDegenerateScore) {
  const AEConfig c = tiny();
  const auto r = encode(c, init_params(c), FeatureMap{"z", 1, "t", Tensor(c.feature_shape())});
  for (double v : r.values) EXPECT_EQ(v, 0.0);
  Representation gt = r;
  gt.values.assign(gt.values.size(), 1.0);
  EXPECT_THROW(similarity_score(r, gt), DegenerateVectorError);
}

TEST(Decode, ZeroLatentGivesZeroOutput) {
  const AEConfig c = tiny(2);
  const Representation z(Space::k2d, "z", 2, 8);
  const Tensor out = decode(c, init_params(c), z);
  EXPECT_EQ(out.shape(), c.feature_shape());
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, CameraEquivariant) {
  const AEConfig c = tiny(3);
  const AEParams p = init_params(c);
  Rng rng(4);
  const Tensor x = random_tensor(c.feature_shape(), rng);
  Tensor y(c.feature_shape());
  const std::size_t perm[3] = {2, 0, 1};
  for (std::size_t k = 0; k < 3; ++k) y.set_slice(k, x.slice(perm[k]));
  const auto rx = encode(c, p, FeatureMap{"x", 1, "t", x});
  const auto ry = encode(c, p, FeatureMap{"y", 1, "t", y});
  for (std::size_t k = 0; k < 3; ++k) {
    const auto a = ry.row(k), b = rx.row(perm[k]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
}

TEST(Losses, TotalGradientMatchesFiniteDifferencesBev) { check_total_gradient(tiny()); }

TEST(Losses, TotalGradientMatchesFiniteDifferencesImage) { check_total_gradient(tiny(2)); }

TEST(Losses, ReconOnlyWithoutGT) {
  const AEConfig c = tiny();
  Rng rng(2);
  const Tensor x = random_tensor(c.feature_shape(), rng);
  const auto l = sample_loss(c, init_params(c), x, nullptr);
  EXPECT_EQ(l.align, 0.0);
  EXPECT_EQ(l.total, l.recon);
  EXPECT_GT(l.recon, 0.0);
}

TEST(Losses, AlignWithinCosineRange) {
  const AEConfig c = AEConfig::for_input(3, 6, 6, 2, 8, {16, 16, 16});
  const AEParams p = init_params(c);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Tensor x = random_tensor(c.feature_shape(), rng);
    Representation gt = random_rep(c, "g", rng);
    const auto l = sample_loss(c, p, x, &gt);
    EXPECT_GE(l.align, 0.0);
    EXPECT_LE(l.align, 2.0);
    // The aligned and anti-aligned extremes.
    gt.values = encode(c, p, FeatureMap{"g", 1, "t", x}).values;
    EXPECT_NEAR(sample_loss(c, p, x, &gt).align, 0.0, 1e-12);
    for (double& v : gt.values) v = -v;
    EXPECT_NEAR(sample_loss(c, p, x, &gt).align, 2.0, 1e-12);
  }
}

TEST(Schedule, CosineAnnealingEndpoints) {
  EXPECT_EQ(cosine_annealing_lr(1e-3, 0, 12), 1e-3);
  EXPECT_LT(cosine_annealing_lr(1e-3, 11, 12), 0.05 * 1e-3);
  EXPECT_NEAR(cosine_annealing_lr(1e-3, 6, 12), 0.5e-3, 1e-18);
  for (std::size_t t = 1; t < 12; ++t) {
    EXPECT_LT(cosine_annealing_lr(1.0, t, 12), cosine_annealing_lr(1.0, t - 1, 12));
  }
}

TEST(Train, OverfitsOneSample) {
  AEConfig c = AEConfig::for_input(4, 8, 8, 0, 32, {32, 32, 32});
  c.stage1_epochs = 200;
  c.stage1_lr = 0.5;
  c.momentum = 0.9;
  c.batch_size = 1;
  c.seed = 2;
  const auto data = random_dataset(c, 1, 12);
  const auto res = train_stage1(c, data, init_params(c));
  ASSERT_EQ(res.report.epochs.size(), 200u);
  const double first = res.report.epochs.front().recon;
  const double last = sample_loss(c, res.params, data[0].features, nullptr).recon;
  EXPECT_LT(last, 0.01 * first) << first << " -> " << last;
  EXPECT_LT(res.report.epochs.back().lr, 0.05 * c.stage1_lr);
}

TEST(Train, Stage1LossNonIncreasingOverWindows) {
  SynthConfig sc;
  sc.n_samples = 32;
  sc.n_phases = 1;
  sc.alphas = {0.5};
  sc.bev_shape = {8, 8, 8};
  sc.seed = 3;
  const auto scenes = gen_scenes(sc);
  HashEmbedder emb;
  GTRepresentations reps;
  for (const auto& s : scenes) reps.emplace(s.sample_id, embed_scene(s, Space::k3d, emb));
  const auto data = gen_features(sc, Space::k3d, scenes, reps);
  AEConfig c = AEConfig::for_input(8, 8, 8, 0, 64, {8, 8, 16});
  c.stage1_epochs = 30;
  c.stage1_lr = 0.02;
  c.batch_size = 8;
  c.seed = 6;
  const auto rep = train_stage1(c, data, init_params(c)).report;
  for (std::size_t t = 5; t < rep.epochs.size(); ++t) {
    EXPECT_LE(rep.epochs[t].recon, rep.epochs[t - 5].recon + 1e-6) << "epoch " << t;
  }
}

TEST(Train, TwoStageIsBitDeterministic) {
  AEConfig c = tiny(2);
  c.stage1_epochs = 3;
  c.stage2_epochs = 2;
  c.stage1_lr = c.stage2_lr = 0.05;
  c.batch_size = 3;
  c.momentum = 0.5;
  const auto data = random_dataset(c, 7, 21);
  const auto reps = random_reps(c, data, 22);
  const auto a = train_two_stage(c, data, reps);
  const auto b = train_two_stage(c, data, reps);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
  ASSERT_EQ(a.report.epochs.size(), 5u);
  EXPECT_EQ(a.report.epochs[0].stage, "stage1");
  EXPECT_EQ(a.report.epochs[4].stage, "stage2");
  c.seed += 1;
  EXPECT_NE(train_two_stage(c, data, reps).params, a.params);
}

TEST(Train, Stage2AlignmentImproves) {
  AEConfig c = tiny();
  c.stage1_epochs = 5;
  c.stage2_epochs = 40;
  c.stage1_lr = 0.05;
  c.stage2_lr = 0.05;
  c.batch_size = 4;
  c.momentum = 0.9;
  const auto data = random_dataset(c, 4, 31);
  const auto reps = random_reps(c, data, 32);
  const auto res = train_two_stage(c, data, reps);
  const auto& e = res.report.epochs;
  EXPECT_LT(e.back().align, 0.5 * e[c.stage1_epochs].align);
  for (const auto& r : e) {
    EXPECT_GE(r.align, 0.0);
    EXPECT_LE(r.align, 2.0);
  }
}

TEST(Train, MissingGTNamesSample) {
  AEConfig c = tiny();
  c.stage1_epochs = 1;
  c.stage2_epochs = 1;
  const auto data = random_dataset(c, 3, 41);
  auto reps = random_reps(c, data, 42);
  reps.erase("s1");
  try {
    train_two_stage(c, data, reps);
    FAIL() << "expected MissingDataError";
  } catch (const MissingDataError& e) {
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos) << e.what();
  }
}

TEST(Train, WrongRowCountIsShapeError) {
  AEConfig c = tiny(2);
  c.stage1_epochs = 0;
  c.stage2_epochs = 1;
  const auto data = random_dataset(c, 2, 51);
  auto reps = random_reps(c, data, 52);
  reps.at("s0").rows = 1;
  reps.at("s0").values.resize(8);
  EXPECT_THROW(train_two_stage(c, data, reps), ShapeError);
}

TEST(Train, NonFiniteLossAbortsWithContext) {
  AEConfig c = tiny();
  c.stage1_epochs = 2;
  c.stage1_lr = 1e300;
  auto data = random_dataset(c, 2, 61);
  try {
    train_stage1(c, data, init_params(c));
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}
