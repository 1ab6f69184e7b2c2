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

#include "respace/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "respace/errors.hpp"
#include "respace/io.hpp"
#include "respace/rng.hpp"

namespace respace {

using nlohmann::json;

namespace {

constexpr std::size_t kHiddenLayers = 3;

// Output extent of a k3 s2 p1 convolution.
std::size_t halve(std::size_t n) { return (n - 1) / 2 + 1; }

// out_pad that makes a k3 s2 p1 transposed convolution map `small` to `target`.
std::size_t restore_pad(std::size_t small, std::size_t target) {
  return target - (2 * small - 1);
}

ConvSpec make_conv(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, std::size_t s,
                   std::size_t p, Activation act) {
  return ConvSpec{in, out, kh, kw, s, s, p, p, 0, 0, false, act};
}

ConvSpec make_deconv(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw,
                     std::size_t s, std::size_t p, std::size_t op_h, std::size_t op_w,
                     Activation act) {
  return ConvSpec{in, out, kh, kw, s, s, p, p, op_h, op_w, true, act};
}

json spec_to_json(const ConvSpec& s) {
  return json{{"in_channels", s.in_channels},
              {"out_channels", s.out_channels},
              {"kernel", {s.kernel_h, s.kernel_w}},
              {"stride", {s.stride_h, s.stride_w}},
              {"pad", {s.pad_h, s.pad_w}},
              {"out_pad", {s.out_pad_h, s.out_pad_w}},
              {"transposed", s.transposed},
              {"activation", activation_name(s.activation)}};
}

ConvSpec spec_from_json(const json& j) {
  ConvSpec s;
  s.in_channels = j.at("in_channels").get<std::size_t>();
  s.out_channels = j.at("out_channels").get<std::size_t>();
  s.kernel_h = j.at("kernel").at(0).get<std::size_t>();
  s.kernel_w = j.at("kernel").at(1).get<std::size_t>();
  s.stride_h = j.at("stride").at(0).get<std::size_t>();
  s.stride_w = j.at("stride").at(1).get<std::size_t>();
  s.pad_h = j.at("pad").at(0).get<std::size_t>();
  s.pad_w = j.at("pad").at(1).get<std::size_t>();
  s.out_pad_h = j.at("out_pad").at(0).get<std::size_t>();
  s.out_pad_w = j.at("out_pad").at(1).get<std::size_t>();
  s.transposed = j.at("transposed").get<bool>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  return s;
}

json architecture_json(const AEConfig& c) {
  json enc = json::array(), dec = json::array();
  for (const auto& s : c.encoder) enc.push_back(spec_to_json(s));
  for (const auto& s : c.decoder) dec.push_back(spec_to_json(s));
  return json{{"input",
               {{"channels", c.in_channels},
                {"height", c.height},
                {"width", c.width},
                {"cameras", c.cameras}}},
              {"latent_dim", c.latent_dim},
              {"encoder", enc},
              {"decoder", dec}};
}

void axpy(double a, const Tensor& x, Tensor& y) {
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += a * xs[i];
}

struct ViewTrace {
  std::vector<Tensor> enc;  // enc[0] = input, enc[i + 1] = output of encoder layer i
  std::vector<Tensor> dec;  // dec[0] = latent, dec[i + 1] = output of decoder layer i
};

ViewTrace forward_view(const AEConfig& c, const AEParams& p, Tensor view) {
  ViewTrace t;
  t.enc.reserve(c.encoder.size() + 1);
  t.enc.push_back(std::move(view));
  for (std::size_t i = 0; i < c.encoder.size(); ++i) {
    t.enc.push_back(layer_forward(t.enc.back(), c.encoder[i], p.encoder[i].weight, p.encoder[i].bias));
  }
  t.dec.reserve(c.decoder.size() + 1);
  t.dec.push_back(t.enc.back());
  for (std::size_t i = 0; i < c.decoder.size(); ++i) {
    t.dec.push_back(layer_forward(t.dec.back(), c.decoder[i], p.decoder[i].weight, p.decoder[i].bias));
  }
  return t;
}

Tensor backward_stack(const std::vector<ConvSpec>& specs, const std::vector<LayerParams>& params,
                      const std::vector<Tensor>& acts, Tensor upstream, double weight,
                      std::vector<LayerParams>& grads, bool need_input_grad) {
  for (std::size_t i = specs.size(); i-- > 0;) {
    ConvGrads g = layer_backward(acts[i], specs[i], params[i].weight, acts[i + 1], upstream);
    axpy(weight, g.grad_w, grads[i].weight);
    axpy(weight, g.grad_b, grads[i].bias);
    if (i > 0 || need_input_grad) upstream = std::move(g.grad_x);
  }
  return upstream;
}

SampleLoss run_sample(const AEConfig& c, const AEParams& p, const Tensor& features,
                      const Representation* gt, double weight, AEParams* grad) {
  require_shape(features, c.feature_shape(), "autoencoder input");
  const std::size_t views = c.views();
  if (gt != nullptr && (gt->rows != views || gt->dim != c.latent_dim)) {
    throw ShapeError("GT representation for '" + gt->sample_id + "': expected " +
                     std::to_string(views) + "x" + std::to_string(c.latent_dim) + ", got " +
                     std::to_string(gt->rows) + "x" + std::to_string(gt->dim));
  }
  const double n_total = static_cast<double>(features.size());
  SampleLoss loss;
  double cos_sum = 0.0;
  for (std::size_t v = 0; v < views; ++v) {
    Tensor view = c.cameras > 0 ? features.slice(v) : features;
    ViewTrace t = forward_view(c, p, std::move(view));
    const Tensor& x = t.enc.front();
    const Tensor& x_hat = t.dec.back();

    Tensor d_out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x_hat[i] - x[i];
      loss.recon += d * d;
      d_out[i] = 2.0 * d / n_total;
    }

    Tensor d_latent;
    if (grad != nullptr) {
      d_latent = backward_stack(c.decoder, p.decoder, t.dec, std::move(d_out), weight, grad->decoder,
                                true);
    }
    if (gt != nullptr) {
      const Tensor& z = t.enc.back();
      CosineWithGrad cg;
      try {
        cg = cosine_sim_grad(z.data(), gt->row(v));
      } catch (const DegenerateVectorError& e) {
        throw DegenerateVectorError("sample '" + gt->sample_id + "' view " + std::to_string(v) +
                                    ": " + e.what());
      }
      cos_sum += cg.value;
      if (grad != nullptr) {
        const double scale = -1.0 / static_cast<double>(views);
        for (std::size_t i = 0; i < cg.grad_a.size(); ++i) d_latent[i] += scale * cg.grad_a[i];
      }
    }
    if (grad != nullptr) {
      backward_stack(c.encoder, p.encoder, t.enc, std::move(d_latent), weight, grad->encoder, false);
    }
  }
  loss.recon /= n_total;
  if (gt != nullptr) loss.align = 1.0 - cos_sum / static_cast<double>(views);
  loss.total = loss.recon + loss.align;
  return loss;
}

}  // namespace

AEConfig AEConfig::for_input(std::size_t channels, std::size_t height, std::size_t width,
                             std::size_t cameras, std::size_t latent_dim,
                             std::vector<std::size_t> hidden) {
  if (channels == 0 || height == 0 || width == 0 || latent_dim == 0) {
    throw ConfigError("autoencoder input and latent dims must be >= 1");
  }
  if (hidden.empty()) {
    for (std::size_t d : {2u, 4u, 8u}) hidden.push_back(std::max<std::size_t>(channels / d, 1));
  }
  if (hidden.size() != kHiddenLayers) {
    throw ConfigError("hidden_channels must list exactly 3 widths");
  }
  AEConfig c;
  c.in_channels = channels;
  c.height = height;
  c.width = width;
  c.cameras = cameras;
  c.latent_dim = latent_dim;

  std::vector<std::size_t> hs{height}, ws{width}, cs{channels};
  for (std::size_t i = 0; i < kHiddenLayers; ++i) {
    hs.push_back(halve(hs.back()));
    ws.push_back(halve(ws.back()));
    cs.push_back(hidden[i]);
  }
  for (std::size_t i = 0; i < kHiddenLayers; ++i) {
    c.encoder.push_back(make_conv(cs[i], cs[i + 1], 3, 3, 2, 1, Activation::kRelu));
  }
  c.encoder.push_back(make_conv(cs[3], latent_dim, hs[3], ws[3], 1, 0, Activation::kIdentity));

  c.decoder.push_back(make_deconv(latent_dim, cs[3], hs[3], ws[3], 1, 0, 0, 0, Activation::kRelu));
  for (std::size_t i = kHiddenLayers; i-- > 0;) {
    const Activation act = i == 0 ? Activation::kIdentity : Activation::kRelu;
    c.decoder.push_back(make_deconv(cs[i + 1], cs[i], 3, 3, 2, 1, restore_pad(hs[i + 1], hs[i]),
                                    restore_pad(ws[i + 1], ws[i]), act));
  }
  c.validate();
  return c;
}

Shape AEConfig::feature_shape() const {
  if (cameras > 0) return {cameras, in_channels, height, width};
  return {in_channels, height, width};
}

void AEConfig::validate() const {
  if (encoder.empty() || decoder.empty()) throw ConfigError("autoencoder needs encoder and decoder layers");
  Shape s = view_shape();
  try {
    for (const auto& spec : encoder) {
      if (spec.transposed) throw ConfigError("encoder layers must be regular convolutions");
      if (spec.in_channels != s[0]) throw ConfigError("encoder channel chain broken");
      s = spec.output_shape(s[1], s[2]);
    }
    if (s != Shape{latent_dim, 1, 1}) {
      throw ConfigError("encoder output " + shape_to_string(s) + " is not [" +
                        std::to_string(latent_dim) + "x1x1]");
    }
    for (const auto& spec : decoder) {
      if (!spec.transposed) throw ConfigError("decoder layers must be transposed convolutions");
      if (spec.in_channels != s[0]) throw ConfigError("decoder channel chain broken");
      s = spec.output_shape(s[1], s[2]);
    }
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("autoencoder shapes do not chain: ") + e.what());
  }
  if (s != view_shape()) {
    throw ConfigError("decoder output " + shape_to_string(s) + " does not match input " +
                      shape_to_string(view_shape()));
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(stage1_lr >= 0.0) || !(stage2_lr >= 0.0)) throw ConfigError("learning rates must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)");
}

json AEConfig::to_json() const {
  json j = architecture_json(*this);
  j["train"] = json{{"stage1_epochs", stage1_epochs}, {"stage1_lr", stage1_lr},
                    {"stage2_epochs", stage2_epochs}, {"stage2_lr", stage2_lr},
                    {"batch_size", batch_size},       {"momentum", momentum},
                    {"seed", seed},                   {"lr_schedule", "cosine"}};
  return j;
}

AEConfig AEConfig::from_json(const json& j) {
  AEConfig c;
  try {
    const json& in = j.at("input");
    c.in_channels = in.at("channels").get<std::size_t>();
    c.height = in.at("height").get<std::size_t>();
    c.width = in.at("width").get<std::size_t>();
    c.cameras = in.at("cameras").get<std::size_t>();
    c.latent_dim = j.at("latent_dim").get<std::size_t>();
    for (const auto& s : j.at("encoder")) c.encoder.push_back(spec_from_json(s));
    for (const auto& s : j.at("decoder")) c.decoder.push_back(spec_from_json(s));
    const json& t = j.at("train");
    c.stage1_epochs = t.at("stage1_epochs").get<std::size_t>();
    c.stage1_lr = t.at("stage1_lr").get<double>();
    c.stage2_epochs = t.at("stage2_epochs").get<std::size_t>();
    c.stage2_lr = t.at("stage2_lr").get<double>();
    c.batch_size = t.at("batch_size").get<std::size_t>();
    c.momentum = t.at("momentum").get<double>();
    c.seed = t.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed autoencoder config: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t AEConfig::digest() const { return fnv1a64(to_json().dump()); }

std::uint64_t AEConfig::architecture_digest() const {
  return fnv1a64(architecture_json(*this).dump());
}

std::size_t AEParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* stack : {&encoder, &decoder})
    for (const auto& l : *stack) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> AEParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto* stack : {&encoder, &decoder})
    for (const auto& l : *stack) {
      out.insert(out.end(), l.weight.values().begin(), l.weight.values().end());
      out.insert(out.end(), l.bias.values().begin(), l.bias.values().end());
    }
  return out;
}

void AEParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError("parameter vector has " + std::to_string(flat.size()) + " values, expected " +
                     std::to_string(parameter_count()));
  }
  std::size_t pos = 0;
  for (auto* stack : {&encoder, &decoder})
    for (auto& l : *stack)
      for (Tensor* t : {&l.weight, &l.bias}) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t->size(), t->data().begin());
        pos += t->size();
      }
}

bool AEParams::all_finite() const {
  for (const auto* stack : {&encoder, &decoder})
    for (const auto& l : *stack)
      if (!l.weight.all_finite() || !l.bias.all_finite()) return false;
  return true;
}

AEParams AEParams::zeros_like(const AEParams& other) {
  AEParams z;
  for (const auto& l : other.encoder) z.encoder.push_back({Tensor(l.weight.shape()), Tensor(l.bias.shape())});
  for (const auto& l : other.decoder) z.decoder.push_back({Tensor(l.weight.shape()), Tensor(l.bias.shape())});
  return z;
}

AEParams init_params(const AEConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, fnv1a64("init_params")));
  AEParams p;
  auto init = [&](const ConvSpec& s) {
    const double k = static_cast<double>(s.kernel_h * s.kernel_w);
    const double fan_in = static_cast<double>(s.in_channels) * k;
    const double fan_out = static_cast<double>(s.out_channels) * k;
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    LayerParams l{Tensor(s.weight_shape()), Tensor(s.bias_shape())};
    for (double& w : l.weight.data()) w = rng.uniform(-a, a);
    return l;
  };
  for (const auto& s : config.encoder) p.encoder.push_back(init(s));
  for (const auto& s : config.decoder) p.decoder.push_back(init(s));
  return p;
}

Tensor encode_view(const AEConfig& config, const AEParams& params, const Tensor& view) {
  require_shape(view, config.view_shape(), "encode");
  Tensor x = view;
  for (std::size_t i = 0; i < config.encoder.size(); ++i) {
    x = layer_forward(x, config.encoder[i], params.encoder[i].weight, params.encoder[i].bias);
  }
  return x;
}

Tensor decode_view(const AEConfig& config, const AEParams& params, std::span<const double> latent) {
  if (latent.size() != config.latent_dim) {
    throw ShapeError("decode: latent has " + std::to_string(latent.size()) + " values, expected " +
                     std::to_string(config.latent_dim));
  }
  Tensor x({config.latent_dim, 1, 1}, std::vector<double>(latent.begin(), latent.end()));
  for (std::size_t i = 0; i < config.decoder.size(); ++i) {
    x = layer_forward(x, config.decoder[i], params.decoder[i].weight, params.decoder[i].bias);
  }
  return x;
}

Representation encode(const AEConfig& config, const AEParams& params, const FeatureMap& fmap) {
  require_shape(fmap.features, config.feature_shape(), "encode");
  Representation rep(config.space(), fmap.sample_id, config.views(), config.latent_dim);
  rep.source = "encoder";
  for (std::size_t v = 0; v < config.views(); ++v) {
    const Tensor z = encode_view(config, params,
                                 config.cameras > 0 ? fmap.features.slice(v) : fmap.features);
    std::copy(z.data().begin(), z.data().end(), rep.row(v).begin());
  }
  return rep;
}

Tensor decode(const AEConfig& config, const AEParams& params, const Representation& latent) {
  if (latent.rows != config.views()) {
    throw ShapeError("decode: expected " + std::to_string(config.views()) + " latent rows, got " +
                     std::to_string(latent.rows));
  }
  if (config.cameras == 0) return decode_view(config, params, latent.row(0));
  Tensor out(config.feature_shape());
  for (std::size_t v = 0; v < config.views(); ++v) out.set_slice(v, decode_view(config, params, latent.row(v)));
  return out;
}

SampleLoss sample_loss(const AEConfig& config, const AEParams& params, const Tensor& features,
                       const Representation* gt) {
  return run_sample(config, params, features, gt, 0.0, nullptr);
}

SampleLoss accumulate_gradient(const AEConfig& config, const AEParams& params,
                               const Tensor& features, const Representation* gt, double weight,
                               AEParams& grad) {
  return run_sample(config, params, features, gt, weight, &grad);
}

json TrainReport::to_json() const {
  json rows = json::array();
  for (const auto& e : epochs) {
    json r{{"stage", e.stage}, {"epoch", e.epoch}, {"lr", e.lr}, {"recon", e.recon}, {"total", e.total}};
    if (e.stage == "stage2") r["align"] = e.align;
    rows.push_back(std::move(r));
  }
  return json{{"epochs", rows}};
}

double cosine_annealing_lr(double base_lr, std::size_t epoch, std::size_t total_epochs) {
  if (total_epochs == 0) return base_lr;
  return 0.5 * base_lr *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                         static_cast<double>(total_epochs)));
}

namespace {

void check_dataset(const AEConfig& config, const std::vector<FeatureMap>& dataset) {
  if (dataset.empty()) throw MissingDataError("training dataset is empty");
  for (const auto& f : dataset) {
    if (f.features.shape() != config.feature_shape()) {
      throw ShapeError("sample '" + f.sample_id + "' phase " + std::to_string(f.phase) +
                       ": expected " + shape_to_string(config.feature_shape()) + ", got " +
                       shape_to_string(f.features.shape()));
    }
  }
}

TrainResult run_stage(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                      const std::vector<const Representation*>& gts, AEParams params,
                      const char* stage, std::size_t epochs, double base_lr) {
  TrainResult result;
  AEParams velocity = AEParams::zeros_like(params);
  std::vector<std::size_t> order(dataset.size());
  const std::uint64_t stage_stream = fnv1a64(stage);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double lr = cosine_annealing_lr(base_lr, epoch, epochs);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, stage_stream, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    EpochRecord rec{stage, epoch, lr, 0.0, 0.0, 0.0};
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      AEParams grad = AEParams::zeros_like(params);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const SampleLoss l = accumulate_gradient(config, params, dataset[i].features, gts[i], weight, grad);
        if (!std::isfinite(l.total)) {
          throw NonFiniteError(std::string(stage) + " epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(batch_index) + ": non-finite loss on sample '" +
                               dataset[i].sample_id + "'");
        }
        rec.recon += l.recon;
        rec.align += l.align;
        rec.total += l.total;
      }
      for (std::size_t s = 0; s < 2; ++s) {
        auto& ps = s == 0 ? params.encoder : params.decoder;
        auto& gs = s == 0 ? grad.encoder : grad.decoder;
        auto& vs = s == 0 ? velocity.encoder : velocity.decoder;
        for (std::size_t l = 0; l < ps.size(); ++l) {
          for (auto [p, g, v] : {std::tuple{&ps[l].weight, &gs[l].weight, &vs[l].weight},
                                 std::tuple{&ps[l].bias, &gs[l].bias, &vs[l].bias}}) {
            auto pd = p->data();
            auto gd = g->data();
            auto vd = v->data();
            for (std::size_t j = 0; j < pd.size(); ++j) {
              vd[j] = config.momentum * vd[j] + gd[j];
              pd[j] -= lr * vd[j];
            }
          }
        }
      }
    }
    const double n = static_cast<double>(dataset.size());
    rec.recon /= n;
    rec.align /= n;
    rec.total /= n;
    if (!params.all_finite()) {
      throw NonFiniteError(std::string(stage) + " epoch " + std::to_string(epoch) +
                           ": parameters became non-finite");
    }
    result.report.epochs.push_back(rec);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace

TrainResult train_stage1(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                         AEParams init) {
  config.validate();
  check_dataset(config, dataset);
  const std::vector<const Representation*> none(dataset.size(), nullptr);
  return run_stage(config, dataset, none, std::move(init), "stage1", config.stage1_epochs,
                   config.stage1_lr);
}

namespace {

std::vector<const Representation*> match_gt(const std::vector<FeatureMap>& dataset,
                                            const GTRepresentations& gt_reps) {
  std::vector<const Representation*> gts;
  std::set<std::string> missing;
  for (const auto& f : dataset) {
    auto it = gt_reps.find(f.sample_id);
    if (it == gt_reps.end()) {
      missing.insert(f.sample_id);
      gts.push_back(nullptr);
    } else {
      gts.push_back(&it->second);
    }
  }
  if (!missing.empty()) {
    std::string ids;
    std::size_t shown = 0;
    for (const auto& id : missing) {
      if (shown++ == 10) {
        ids += ", ...";
        break;
      }
      ids += (ids.empty() ? "" : ", ") + id;
    }
    throw MissingDataError("no GT representation for " + std::to_string(missing.size()) +
                           " sample(s): " + ids);
  }
  return gts;
}

}  // namespace

TrainResult train_stage2(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                         const GTRepresentations& gt_reps, AEParams init) {
  config.validate();
  check_dataset(config, dataset);
  const auto gts = match_gt(dataset, gt_reps);
  return run_stage(config, dataset, gts, std::move(init), "stage2", config.stage2_epochs,
                   config.stage2_lr);
}

TrainResult train_two_stage(const AEConfig& config, const std::vector<FeatureMap>& dataset,
                            const GTRepresentations& gt_reps) {
  match_gt(dataset, gt_reps);
  TrainResult s1 = train_stage1(config, dataset, init_params(config));
  TrainResult s2 = train_stage2(config, dataset, gt_reps, std::move(s1.params));
  s1.report.epochs.insert(s1.report.epochs.end(), s2.report.epochs.begin(), s2.report.epochs.end());
  return TrainResult{std::move(s2.params), std::move(s1.report)};
}

}  // namespace respace
