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

// Test-only reference implementations. These are written directly from the
// textbook definitions and deliberately share no code with src/.

#pragma once

#include <cstdint>
#include <vector>

#include "respace/layers.hpp"
#include "respace/rng.hpp"
#include "respace/tensor.hpp"

namespace respace::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Six nested loops over (co, oh, ow, ci, kh, kw) with explicit zero padding.
inline Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride_h,
                         int stride_w, int pad_h, int pad_w, bool relu = false) {
  const int ci_n = static_cast<int>(x.dim(0)), h = static_cast<int>(x.dim(1)),
            wd = static_cast<int>(x.dim(2));
  const int co_n = static_cast<int>(w.dim(0)), kh_n = static_cast<int>(w.dim(2)),
            kw_n = static_cast<int>(w.dim(3));
  const int oh_n = (h + 2 * pad_h - kh_n) / stride_h + 1;
  const int ow_n = (wd + 2 * pad_w - kw_n) / stride_w + 1;
  Tensor y({static_cast<std::size_t>(co_n), static_cast<std::size_t>(oh_n),
            static_cast<std::size_t>(ow_n)});
  for (int co = 0; co < co_n; ++co)
    for (int oh = 0; oh < oh_n; ++oh)
      for (int ow = 0; ow < ow_n; ++ow) {
        double s = b[co];
        for (int ci = 0; ci < ci_n; ++ci)
          for (int kh = 0; kh < kh_n; ++kh)
            for (int kw = 0; kw < kw_n; ++kw) {
              const int ih = oh * stride_h + kh - pad_h;
              const int iw = ow * stride_w + kw - pad_w;
              if (ih < 0 || ih >= h || iw < 0 || iw >= wd) continue;
              s += x[(ci * h + ih) * wd + iw] * w[((co * ci_n + ci) * kh_n + kh) * kw_n + kw];
            }
        if (relu && s < 0) s = 0;
        y[(co * oh_n + oh) * ow_n + ow] = s;
      }
  return y;
}

// Transposed convolution as a gather: stride-dilate the input, pad by
// (k - 1 - p) (plus out_pad on the far side) and correlate with the
// spatially flipped, channel-swapped kernel. w is [C_in, C_out, kh, kw].
inline Tensor naive_deconv(const Tensor& x, const Tensor& w, const Tensor& b, int stride_h,
                           int stride_w, int pad_h, int pad_w, int out_pad_h, int out_pad_w,
                           bool relu = false) {
  const int ci_n = static_cast<int>(x.dim(0)), h = static_cast<int>(x.dim(1)),
            wd = static_cast<int>(x.dim(2));
  const int co_n = static_cast<int>(w.dim(1)), kh_n = static_cast<int>(w.dim(2)),
            kw_n = static_cast<int>(w.dim(3));
  const int oh_n = (h - 1) * stride_h - 2 * pad_h + kh_n + out_pad_h;
  const int ow_n = (wd - 1) * stride_w - 2 * pad_w + kw_n + out_pad_w;
  const int dil_h = (h - 1) * stride_h + 1, dil_w = (wd - 1) * stride_w + 1;
  Tensor y({static_cast<std::size_t>(co_n), static_cast<std::size_t>(oh_n),
            static_cast<std::size_t>(ow_n)});
  for (int co = 0; co < co_n; ++co)
    for (int oh = 0; oh < oh_n; ++oh)
      for (int ow = 0; ow < ow_n; ++ow) {
        double s = b[co];
        for (int ci = 0; ci < ci_n; ++ci)
          for (int kh = 0; kh < kh_n; ++kh)
            for (int kw = 0; kw < kw_n; ++kw) {
              // position inside the dilated input
              const int dh = oh + kh - (kh_n - 1 - pad_h);
              const int dw = ow + kw - (kw_n - 1 - pad_w);
              if (dh < 0 || dh >= dil_h || dw < 0 || dw >= dil_w) continue;
              if (dh % stride_h != 0 || dw % stride_w != 0) continue;
              const int ih = dh / stride_h, iw = dw / stride_w;
              const int fkh = kh_n - 1 - kh, fkw = kw_n - 1 - kw;
              s += x[(ci * h + ih) * wd + iw] * w[((ci * co_n + co) * kh_n + fkh) * kw_n + fkw];
            }
        if (relu && s < 0) s = 0;
        y[(co * oh_n + oh) * ow_n + ow] = s;
      }
  return y;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

inline double inner(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace respace::testing
