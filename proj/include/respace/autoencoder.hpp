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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "respace/embedding.hpp"
#include "respace/feature_map.hpp"
#include "respace/layers.hpp"
#include "respace/tensor.hpp"

namespace respace {

// Architecture and training schedule of the alignment autoencoder.
//
// The encoder is three stride-2 3x3 convolutions (ReLU) followed by one
// convolution whose kernel covers the remaining spatial extent, giving a
// latent_dim x 1 x 1 code. The decoder mirrors it with transposed
// convolutions, out_pad chosen per layer so the output shape equals the
// input shape exactly. Image features carry a leading camera axis; each
// camera view goes through the same weights.
struct AEConfig {
  std::size_t in_channels = 256;
  std::size_t height = 25;
  std::size_t width = 25;
  std::size_t cameras = 0;  // 0: BEV features [C,H,W]; >0: [cameras,C,H,W]
  std::size_t latent_dim = kReSpaceDim;
  std::vector<ConvSpec> encoder;
  std::vector<ConvSpec> decoder;

  std::size_t stage1_epochs = 12;
  double stage1_lr = 1e-3;
  std::size_t stage2_epochs = 6;
  double stage2_lr = 1e-4;
  std::size_t batch_size = 128;
  double momentum = 0.0;
  std::uint64_t seed = 0;

  // Builds the layer stack for one view of shape [channels, height, width].
  // hidden_channels defaults to channels/2, /4, /8 (at least 1).
  static AEConfig for_input(std::size_t channels, std::size_t height, std::size_t width,
                            std::size_t cameras = 0, std::size_t latent_dim = kReSpaceDim,
                            std::vector<std::size_t> hidden_channels = {});

  Space space() const { return cameras > 0 ? Space::k2d : Space::k3d; }
  std::size_t views() const { return cameras > 0 ? cameras : 1; }
  Shape view_shape() const { return {in_channels, height, width}; }
  Shape feature_shape() const;

  // Checks every layer chains: encoder ends at latent_dim x 1 x 1, decoder
  // ends at the view shape. Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static AEConfig from_json(const nlohmann::json& j);

  // FNV-1a 64 over the canonical JSON (keys sorted) of the full config.
  std::uint64_t digest() const;
  // Same, restricted to what determines parameter shapes.
  std::uint64_t architecture_digest() const;
};

struct LayerParams {
  Tensor weight;
  Tensor bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Encoder/decoder weights. Gradients use the same container.
struct AEParams {
  std::vector<LayerParams> encoder;
  std::vector<LayerParams> decoder;

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;

  static AEParams zeros_like(const AEParams& other);

  friend bool operator==(const AEParams&, const AEParams&) = default;
};

// Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)); zero biases.
AEParams init_params(const AEConfig& config);

// A single view [C,H,W] to its latent [latent_dim,1,1].
Tensor encode_view(const AEConfig& config, const AEParams& params, const Tensor& view);
// A latent of latent_dim values back to one view [C,H,W].
Tensor decode_view(const AEConfig& config, const AEParams& params, std::span<const double> latent);

// Feature map to its representation: one row per camera view.
Representation encode(const AEConfig& config, const AEParams& params, const FeatureMap& fmap);
// Representation rows back to a tensor of config.feature_shape().
Tensor decode(const AEConfig& config, const AEParams& params, const Representation& latent);

struct SampleLoss {
  double recon = 0.0;
  double align = 0.0;  // 1 - S; zero when no GT representation is given
  double total = 0.0;
};

// L_recon = MSE(F, decode(encode(F))) over the whole sample, plus, when
// `gt` is non-null, L_align = 1 - mean over views of cos(R_FM, R_GT).
SampleLoss sample_loss(const AEConfig& config, const AEParams& params, const Tensor& features,
                       const Representation* gt);

// Same loss; adds weight * dL/dparams into `grad`.
SampleLoss accumulate_gradient(const AEConfig& config, const AEParams& params,
                               const Tensor& features, const Representation* gt, double weight,
                               AEParams& grad);

struct EpochRecord {
  std::string stage;  // "stage1" | "stage2"
  std::size_t epoch = 0;
  double lr = 0.0;
  double recon = 0.0;
  double align = 0.0;
  double total = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;

  nlohmann::json to_json() const;
  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// eta_t = 0.5 * eta_0 * (1 + cos(pi * t / T)), t = 0 .. T-1
double cosine_annealing_lr(double base_lr, std::size_t epoch, std::size_t total_epochs);

using GTRepresentations = std::map<std::string, Representation>;

struct TrainResult {
  AEParams params;
  TrainReport report;
};

// Reconstruction-only minibatch gradient descent from `init`.
TrainResult train_stage1(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                         AEParams init);
// Reconstruction + alignment from the stage-1 parameters. Every sample id
// must have a GT representation with views() rows of latent_dim values.
TrainResult train_stage2(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                         const GTRepresentations& gt_reps, AEParams init);
// init_params -> stage 1 -> stage 2; the report holds both stages.
TrainResult train_two_stage(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                            const GTRepresentations& gt_reps);

}  // namespace respace
