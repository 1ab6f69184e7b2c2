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
#include <span>
#include <string>
#include <vector>

#include "respace/tensor.hpp"

namespace respace {

enum class Activation { kRelu, kIdentity };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Parameterization of one convolution or transposed-convolution layer.
//
// Weight layout follows the usual deep-learning convention:
//   regular:    [out_channels, in_channels, kernel_h, kernel_w]
//   transposed: [in_channels, out_channels, kernel_h, kernel_w]
// so a regular layer's weight tensor, read as a transposed layer with the
// channel counts swapped, is exactly its adjoint.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  std::size_t out_pad_h = 0;
  std::size_t out_pad_w = 0;
  bool transposed = false;
  Activation activation = Activation::kIdentity;

  void validate() const;
  Shape weight_shape() const;
  Shape bias_shape() const { return {out_channels}; }
  // Output [C_out, H', W'] for an input of spatial size h x w.
  Shape output_shape(std::size_t h, std::size_t w) const;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct ConvGrads {
  Tensor grad_x;
  Tensor grad_w;
  Tensor grad_b;
};

// Cross-correlation (no kernel flip) plus bias, then activation.
Tensor conv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                      const Tensor& b);

// `y` is the forward output; it supplies the ReLU mask (subgradient 0 at 0)
// and is ignored for identity activations.
ConvGrads conv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                          const Tensor& y, const Tensor& grad_out);

// Transposed convolution:
//   H' = (H - 1) * stride_h - 2 * pad_h + kernel_h + out_pad_h
Tensor deconv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                        const Tensor& b);
ConvGrads deconv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                            const Tensor& y, const Tensor& grad_out);

// Dispatch on spec.transposed.
Tensor layer_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                     const Tensor& b);
ConvGrads layer_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w,
                         const Tensor& y, const Tensor& grad_out);

struct LossWithGrad {
  double value = 0.0;
  Tensor grad;  // d value / d x_hat
};

// Mean over all elements of (x_hat - x)^2.
LossWithGrad mse_loss(const Tensor& x, const Tensor& x_hat);

inline constexpr double kNormEps = 1e-12;

double l2_norm(std::span<const double> v);

// (a.b) / (|a| |b|). Throws DegenerateVectorError when either norm is
// <= kNormEps.
double cosine_sim(std::span<const double> a, std::span<const double> b);

struct CosineWithGrad {
  double value = 0.0;
  std::vector<double> grad_a;
};

// grad_a = b / (|a||b|) - cos(a, b) * a / |a|^2
CosineWithGrad cosine_sim_grad(std::span<const double> a, std::span<const double> b);

}  // namespace respace
