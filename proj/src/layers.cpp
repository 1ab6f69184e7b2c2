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

#include "respace/layers.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "respace/errors.hpp"

namespace respace {

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name + "'");
}

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) throw ConfigError("conv: channel counts must be >= 1");
  if (kernel_h == 0 || kernel_w == 0) throw ConfigError("conv: kernel dims must be >= 1");
  if (stride_h == 0 || stride_w == 0) throw ConfigError("conv: strides must be >= 1");
  if (transposed) {
    if (out_pad_h >= stride_h || out_pad_w >= stride_w) {
      throw ConfigError("deconv: out_pad (" + std::to_string(out_pad_h) + "," +
                        std::to_string(out_pad_w) + ") must be < stride (" +
                        std::to_string(stride_h) + "," + std::to_string(stride_w) + ")");
    }
  } else if (out_pad_h != 0 || out_pad_w != 0) {
    throw ConfigError("conv: out_pad is only meaningful for transposed layers");
  }
}

Shape ConvSpec::weight_shape() const {
  if (transposed) return {in_channels, out_channels, kernel_h, kernel_w};
  return {out_channels, in_channels, kernel_h, kernel_w};
}

Shape ConvSpec::output_shape(std::size_t h, std::size_t w) const {
  validate();
  auto axis = [&](std::size_t in, std::size_t k, std::size_t s, std::size_t p,
                  std::size_t op, const char* name) -> std::size_t {
    const auto n = static_cast<std::int64_t>(in);
    std::int64_t out;
    if (transposed) {
      out = (n - 1) * static_cast<std::int64_t>(s) - 2 * static_cast<std::int64_t>(p) +
            static_cast<std::int64_t>(k) + static_cast<std::int64_t>(op);
    } else {
      const std::int64_t span = n + 2 * static_cast<std::int64_t>(p) - static_cast<std::int64_t>(k);
      out = span < 0 ? 0 : span / static_cast<std::int64_t>(s) + 1;
    }
    if (out <= 0) {
      throw ShapeError(std::string(transposed ? "deconv" : "conv") + ": input " + name +
                       "=" + std::to_string(in) + " too small for kernel " + std::to_string(k));
    }
    return static_cast<std::size_t>(out);
  };
  return {out_channels, axis(h, kernel_h, stride_h, pad_h, out_pad_h, "H"),
          axis(w, kernel_w, stride_w, pad_w, out_pad_w, "W")};
}

namespace {

void check_inputs(const Tensor& x, const ConvSpec& spec, const Tensor& w, const char* op) {
  spec.validate();
  if (x.ndim() != 3 || x.dim(0) != spec.in_channels) {
    throw ShapeError(std::string(op) + ": input expected [" + std::to_string(spec.in_channels) +
                     ",H,W], got " + shape_to_string(x.shape()));
  }
  require_shape(w, spec.weight_shape(), op);
}

void apply_activation(Tensor& y, Activation a) {
  if (a != Activation::kRelu) return;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
}

// Gradient wrt the pre-activation.
Tensor masked_grad(const ConvSpec& spec, const Tensor& y, const Tensor& grad_out,
                   const Shape& out_shape, const char* op) {
  require_shape(grad_out, out_shape, op);
  Tensor g = grad_out;
  if (spec.activation == Activation::kRelu) {
    require_shape(y, out_shape, op);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(y[i] > 0.0)) g[i] = 0.0;
    }
  }
  return g;
}

// Index of an (input-grid) position reached from output/input coordinate
// `o` via kernel tap `k`; returns false when it falls into padding.
inline bool tap(std::size_t o, std::size_t s, std::size_t k, std::size_t p, std::size_t limit,
                std::size_t& out) {
  const std::size_t pos = o * s + k;
  if (pos < p) return false;
  out = pos - p;
  return out < limit;
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& b) {
  check_inputs(x, spec, w, "conv2d_forward");
  require_shape(b, spec.bias_shape(), "conv2d_forward bias");
  const std::size_t ci_n = spec.in_channels, h = x.dim(1), wd = x.dim(2);
  const Shape out_shape = spec.output_shape(h, wd);
  const std::size_t oh_n = out_shape[1], ow_n = out_shape[2];
  Tensor y(out_shape);

  const double* xp = x.data().data();
  const double* wp = w.data().data();
  double* yp = y.data().data();
  for (std::size_t co = 0; co < spec.out_channels; ++co) {
    for (std::size_t oh = 0; oh < oh_n; ++oh) {
      for (std::size_t ow = 0; ow < ow_n; ++ow) {
        double acc = b[co];
        for (std::size_t ci = 0; ci < ci_n; ++ci) {
          const double* wk = wp + ((co * ci_n + ci) * spec.kernel_h) * spec.kernel_w;
          const double* xc = xp + ci * h * wd;
          for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
            std::size_t ih;
            if (!tap(oh, spec.stride_h, kh, spec.pad_h, h, ih)) continue;
            for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
              std::size_t iw;
              if (!tap(ow, spec.stride_w, kw, spec.pad_w, wd, iw)) continue;
              acc += xc[ih * wd + iw] * wk[kh * spec.kernel_w + kw];
            }
          }
        }
        yp[(co * oh_n + oh) * ow_n + ow] = acc;
      }
    }
  }
  apply_activation(y, spec.activation);
  return y;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& y,
                          const Tensor& grad_out) {
  check_inputs(x, spec, w, "conv2d_backward");
  const std::size_t ci_n = spec.in_channels, h = x.dim(1), wd = x.dim(2);
  const Shape out_shape = spec.output_shape(h, wd);
  const std::size_t oh_n = out_shape[1], ow_n = out_shape[2];
  const Tensor g = masked_grad(spec, y, grad_out, out_shape, "conv2d_backward grad_out");

  ConvGrads grads{Tensor(x.shape()), Tensor(w.shape()), Tensor(spec.bias_shape())};
  const double* xp = x.data().data();
  const double* wp = w.data().data();
  const double* gp = g.data().data();
  double* gx = grads.grad_x.data().data();
  double* gw = grads.grad_w.data().data();

  for (std::size_t co = 0; co < spec.out_channels; ++co) {
    double bsum = 0.0;
    for (std::size_t oh = 0; oh < oh_n; ++oh) {
      for (std::size_t ow = 0; ow < ow_n; ++ow) {
        const double go = gp[(co * oh_n + oh) * ow_n + ow];
        bsum += go;
        if (go == 0.0) continue;
        for (std::size_t ci = 0; ci < ci_n; ++ci) {
          const std::size_t wbase = ((co * ci_n + ci) * spec.kernel_h) * spec.kernel_w;
          const std::size_t xbase = ci * h * wd;
          for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
            std::size_t ih;
            if (!tap(oh, spec.stride_h, kh, spec.pad_h, h, ih)) continue;
            for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
              std::size_t iw;
              if (!tap(ow, spec.stride_w, kw, spec.pad_w, wd, iw)) continue;
              const std::size_t xi = xbase + ih * wd + iw;
              const std::size_t wi = wbase + kh * spec.kernel_w + kw;
              gw[wi] += go * xp[xi];
              gx[xi] += go * wp[wi];
            }
          }
        }
      }
    }
    grads.grad_b[co] = bsum;
  }
  return grads;
}

Tensor deconv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& b) {
  check_inputs(x, spec, w, "deconv2d_forward");
  require_shape(b, spec.bias_shape(), "deconv2d_forward bias");
  const std::size_t ci_n = spec.in_channels, co_n = spec.out_channels;
  const std::size_t h = x.dim(1), wd = x.dim(2);
  const Shape out_shape = spec.output_shape(h, wd);
  const std::size_t oh_n = out_shape[1], ow_n = out_shape[2];
  Tensor y(out_shape);

  const double* xp = x.data().data();
  const double* wp = w.data().data();
  double* yp = y.data().data();
  for (std::size_t co = 0; co < co_n; ++co) {
    for (std::size_t i = 0; i < oh_n * ow_n; ++i) yp[co * oh_n * ow_n + i] = b[co];
  }
  // Scatter: input (ih, iw) lands on output (ih*s - p + k).
  for (std::size_t ci = 0; ci < ci_n; ++ci) {
    for (std::size_t ih = 0; ih < h; ++ih) {
      for (std::size_t iw = 0; iw < wd; ++iw) {
        const double v = xp[(ci * h + ih) * wd + iw];
        if (v == 0.0) continue;
        for (std::size_t co = 0; co < co_n; ++co) {
          const double* wk = wp + ((ci * co_n + co) * spec.kernel_h) * spec.kernel_w;
          double* yc = yp + co * oh_n * ow_n;
          for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
            std::size_t oh;
            if (!tap(ih, spec.stride_h, kh, spec.pad_h, oh_n, oh)) continue;
            for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
              std::size_t ow;
              if (!tap(iw, spec.stride_w, kw, spec.pad_w, ow_n, ow)) continue;
              yc[oh * ow_n + ow] += v * wk[kh * spec.kernel_w + kw];
            }
          }
        }
      }
    }
  }
  apply_activation(y, spec.activation);
  return y;
}

ConvGrads deconv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& y,
                            const Tensor& grad_out) {
  check_inputs(x, spec, w, "deconv2d_backward");
  const std::size_t ci_n = spec.in_channels, co_n = spec.out_channels;
  const std::size_t h = x.dim(1), wd = x.dim(2);
  const Shape out_shape = spec.output_shape(h, wd);
  const std::size_t oh_n = out_shape[1], ow_n = out_shape[2];
  const Tensor g = masked_grad(spec, y, grad_out, out_shape, "deconv2d_backward grad_out");

  ConvGrads grads{Tensor(x.shape()), Tensor(w.shape()), Tensor(spec.bias_shape())};
  const double* xp = x.data().data();
  const double* wp = w.data().data();
  const double* gp = g.data().data();
  double* gx = grads.grad_x.data().data();
  double* gw = grads.grad_w.data().data();

  for (std::size_t co = 0; co < co_n; ++co) {
    double bsum = 0.0;
    for (std::size_t i = 0; i < oh_n * ow_n; ++i) bsum += gp[co * oh_n * ow_n + i];
    grads.grad_b[co] = bsum;
  }
  for (std::size_t ci = 0; ci < ci_n; ++ci) {
    for (std::size_t ih = 0; ih < h; ++ih) {
      for (std::size_t iw = 0; iw < wd; ++iw) {
        const std::size_t xi = (ci * h + ih) * wd + iw;
        const double v = xp[xi];
        double acc = 0.0;
        for (std::size_t co = 0; co < co_n; ++co) {
          const std::size_t wbase = ((ci * co_n + co) * spec.kernel_h) * spec.kernel_w;
          const double* gc = gp + co * oh_n * ow_n;
          for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
            std::size_t oh;
            if (!tap(ih, spec.stride_h, kh, spec.pad_h, oh_n, oh)) continue;
            for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
              std::size_t ow;
              if (!tap(iw, spec.stride_w, kw, spec.pad_w, ow_n, ow)) continue;
              const double go = gc[oh * ow_n + ow];
              const std::size_t wi = wbase + kh * spec.kernel_w + kw;
              acc += go * wp[wi];
              gw[wi] += go * v;
            }
          }
        }
        gx[xi] = acc;
      }
    }
  }
  return grads;
}

Tensor layer_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& b) {
  return spec.transposed ? deconv2d_forward(x, spec, w, b) : conv2d_forward(x, spec, w, b);
}

ConvGrads layer_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& y,
                         const Tensor& grad_out) {
  return spec.transposed ? deconv2d_backward(x, spec, w, y, grad_out)
                         : conv2d_backward(x, spec, w, y, grad_out);
}

LossWithGrad mse_loss(const Tensor& x, const Tensor& x_hat) {
  require_shape(x_hat, x.shape(), "mse_loss");
  const auto n = static_cast<double>(x.size());
  LossWithGrad out{0.0, Tensor(x.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_hat[i] - x[i];
    sum += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.value = sum / n;
  return out;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, double na, double nb) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_sim: length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (!(na > kNormEps) || !(nb > kNormEps)) {
    throw DegenerateVectorError("cosine_sim: vector norm below " + std::to_string(kNormEps) +
                                " (|a|=" + std::to_string(na) + ", |b|=" + std::to_string(nb) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  check_pair(a, b, na, nb);
  const double c = dot(a, b) / (na * nb);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

CosineWithGrad cosine_sim_grad(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  check_pair(a, b, na, nb);
  const double c = dot(a, b) / (na * nb);
  CosineWithGrad out{c, std::vector<double>(a.size())};
  const double inv_ab = 1.0 / (na * nb);
  const double c_over_aa = c / (na * na);
  for (std::size_t i = 0; i < a.size(); ++i) out.grad_a[i] = b[i] * inv_ab - c_over_aa * a[i];
  return out;
}

}  // namespace respace
