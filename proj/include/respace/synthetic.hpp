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
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "respace/autoencoder.hpp"
#include "respace/embedding.hpp"
#include "respace/feature_map.hpp"
#include "respace/gt.hpp"
#include "respace/scoring.hpp"

namespace respace {

// Desk-scale stand-in for phase-indexed feature dumps.
//
// Each sample has a target tensor T_s, a fixed random projection of its GT
// representation minus the set mean, scaled to unit RMS. Phase p emits
//   F_{s,p} = alpha_p * T_s + (1 - alpha_p) * eps_{s,p} + sigma * eta_{s,p}
// with eps and eta unit-RMS Gaussian noise, so GT information in the
// features grows with the maturity schedule alpha.
struct SynthConfig {
  std::size_t n_samples = 24;
  std::size_t n_phases = 8;
  Shape bev_shape{32, 8, 8};
  Shape image_shape{2, 32, 6, 8};
  std::vector<double> alphas;  // empty: linear from 0 to 1 over the phases
  double sigma = 0.1;
  std::uint64_t seed = 0;
  std::string module_tag = "synthetic";

  // Surrogate metric ranges; each metric is affine in alpha plus uniform
  // jitter in [-jitter, jitter].
  double map_lo = 0.05, map_hi = 0.40;
  double nds_lo = 0.10, nds_hi = 0.50;
  double jitter = 0.005;

  std::vector<double> schedule() const;  // alphas or the linear default
  std::size_t cameras() const { return image_shape.at(0); }
  Shape feature_shape(Space space) const { return space == Space::k2d ? image_shape : bev_shape; }
  void validate() const;

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j, SynthConfig defaults);
  static SynthConfig from_json(const nlohmann::json& j);
};

// 1-6 seeded random boxes per scene; cameras = config.cameras().
std::vector<GTScene> gen_scenes(const SynthConfig& config);

// All phases for every scene, ordered by (phase, sample). Phase indices run
// from 1 to n_phases.
std::vector<FeatureMap> gen_features(const SynthConfig& config, Space space,
                                     const std::vector<GTScene>& scenes,
                                     const GTRepresentations& gt_reps);

// {mAP, NDS} over phases 1..n_phases.
std::vector<MetricSeries> gen_metric_series(const SynthConfig& config);

}  // namespace respace
