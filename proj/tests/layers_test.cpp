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

#include "checks.hpp"
#include "oracles.hpp"
#include "respace/errors.hpp"
#include "respace/grad_check.hpp"
#include "respace/layers.hpp"

using namespace respace;
using namespace respace::testing;

namespace {

ConvSpec conv(std::size_t ci, std::size_t co, std::size_t k, std::size_t s, std::size_t p,
              Activation act = Activation::kIdentity) {
  return ConvSpec{ci, co, k, k, s, s, p, p, 0, 0, false, act};
}

ConvSpec deconv(std::size_t ci, std::size_t co, std::size_t k, std::size_t s, std::size_t p,
                std::size_t op, Activation act = Activation::kIdentity) {
  return ConvSpec{ci, co, k, k, s, s, p, p, op, op, true, act};
}

}  // namespace

TEST(Conv2dForward, OnesKernelSumsWindow) {
  const Tensor x = Tensor::filled({1, 3, 3}, 1.0);
  const Tensor w = Tensor::filled({1, 1, 2, 2}, 1.0);
  const Tensor y = conv2d_forward(x, conv(1, 1, 2, 1, 0), w, Tensor({1}));
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2}));
  for (double v : y.data()) EXPECT_EQ(v, 4.0);
}

TEST(Conv2dForward, UnitKernelIsIdentity) {
  Rng rng(7);
  const Tensor x = random_tensor({1, 3, 3}, rng);
  const Tensor y = conv2d_forward(x, conv(1, 1, 1, 1, 0), Tensor::filled({1, 1, 1, 1}, 1.0),
                                  Tensor({1}));
  EXPECT_EQ(y, x);
}

TEST(Conv2dForward, StridedPaddedMatchesNaiveLoops) {
  Rng rng(11);
  const Tensor x = random_tensor({2, 5, 5}, rng);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  const Tensor y = conv2d_forward(x, conv(2, 3, 3, 2, 1), w, b);
  ASSERT_EQ(y.shape(), (Shape{3, 3, 3}));
  const Tensor ref = naive_conv(x, w, b, 2, 2, 1, 1);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
}

TEST(Conv2dForward, ReluClampsNegatives) {
  const Tensor x = Tensor::filled({1, 2, 2}, -1.0);
  const Tensor y = conv2d_forward(x, conv(1, 1, 1, 1, 0, Activation::kRelu),
                                  Tensor::filled({1, 1, 1, 1}, 1.0), Tensor({1}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2dForward, ShapeMismatchNamesDims) {
  const Tensor x({3, 4, 4});
  try {
    conv2d_forward(x, conv(2, 1, 3, 1, 0), Tensor({1, 2, 3, 3}), Tensor({1}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[3x4x4]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(conv2d_forward(Tensor({2, 4, 4}), conv(2, 1, 3, 1, 0), Tensor({1, 2, 2, 2}),
                              Tensor({1})),
               ShapeError);
  EXPECT_THROW(conv2d_forward(Tensor({2, 4, 4}), conv(2, 1, 3, 1, 0), Tensor({1, 2, 3, 3}),
                              Tensor({2})),
               ShapeError);
}

TEST(Conv2dForward, ExhaustiveGridMatchesOracles) {
  const GridResult r = run_forward_grid(2024);
  EXPECT_GT(r.cases, 10000u);
  EXPECT_LE(r.max_abs_error, 1e-12);
}

TEST(Conv2dBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(3);
  const ConvSpec spec = conv(2, 3, 3, 2, 1, Activation::kRelu);
  const Tensor x = random_tensor({2, 5, 5}, rng);
  const Tensor w = random_tensor(spec.weight_shape(), rng);
  const Tensor y = conv2d_forward(x, spec, w, Tensor({3}));
  const ConvGrads g = conv2d_backward(x, spec, w, y, Tensor(y.shape()));
  for (const Tensor* t : {&g.grad_x, &g.grad_w, &g.grad_b})
    for (double v : t->data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2dBackward, UnitKernelPassesGradientThrough) {
  Rng rng(5);
  const ConvSpec spec = conv(1, 1, 1, 1, 0);
  const Tensor x = random_tensor({1, 3, 3}, rng);
  const Tensor w = Tensor::filled({1, 1, 1, 1}, 1.0);
  const Tensor y = conv2d_forward(x, spec, w, Tensor({1}));
  const Tensor up = random_tensor(y.shape(), rng);
  EXPECT_EQ(conv2d_backward(x, spec, w, y, up).grad_x, up);
}

TEST(Conv2dBackward, MatchesFiniteDifferences) {
  const ConvSpec specs[] = {conv(2, 3, 3, 2, 1, Activation::kRelu), conv(3, 2, 3, 1, 1),
                            conv(2, 2, 2, 2, 0, Activation::kRelu),
                            ConvSpec{2, 3, 2, 3, 1, 2, 1, 0, 0, 0, false, Activation::kIdentity}};
  std::uint64_t seed = 100;
  for (const auto& spec : specs) {
    const auto r = check_layer_gradient(spec, 6, 7, seed++);
    EXPECT_GE(r.coordinates_checked, 100u);
    EXPECT_LE(r.max_rel_error, 1e-4) << "coordinate " << r.worst_coordinate << " analytic "
                                     << r.analytic_at_worst << " numeric " << r.numeric_at_worst;
  }
}

TEST(Conv2dBackward, RejectsMisshapedUpstream) {
  const ConvSpec spec = conv(1, 1, 2, 1, 0);
  const Tensor x({1, 3, 3}), w({1, 1, 2, 2});
  const Tensor y = conv2d_forward(x, spec, w, Tensor({1}));
  EXPECT_THROW(conv2d_backward(x, spec, w, y, Tensor({1, 3, 3})), ShapeError);
}

TEST(Deconv2dForward, SingleInputBroadcastsKernel) {
  const Tensor x = Tensor::filled({1, 1, 1}, 2.5);
  const Tensor y = deconv2d_forward(x, deconv(1, 1, 2, 1, 0, 0),
                                    Tensor::filled({1, 1, 2, 2}, 1.0), Tensor({1}));
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2}));
  for (double v : y.data()) EXPECT_EQ(v, 2.5);
}

TEST(Deconv2dForward, OutputShapeFormula) {
  EXPECT_EQ(deconv(1, 1, 3, 2, 1, 0).output_shape(4, 4), (Shape{1, 7, 7}));
  EXPECT_EQ(deconv(1, 1, 3, 2, 1, 1).output_shape(4, 4), (Shape{1, 8, 8}));
}

TEST(Deconv2dForward, OutPadMustBeBelowStride) {
  EXPECT_THROW(deconv(1, 1, 3, 2, 1, 2).validate(), ConfigError);
  EXPECT_THROW(deconv2d_forward(Tensor({1, 2, 2}), deconv(1, 1, 3, 1, 0, 1), Tensor({1, 1, 3, 3}),
                                Tensor({1})),
               ConfigError);
}

TEST(Deconv2dForward, UnitStrideIsFullCorrelationWithFlippedKernel) {
  Rng rng(21);
  const Tensor x = random_tensor({2, 4, 5}, rng);
  const Tensor w = random_tensor({2, 3, 3, 2}, rng);
  const Tensor b({3});
  const ConvSpec spec{2, 3, 3, 2, 1, 1, 0, 0, 0, 0, true, Activation::kIdentity};
  const Tensor y = deconv2d_forward(x, spec, w, b);
  // Full correlation: pad by k-1 and correlate with the flipped, channel-swapped kernel.
  Tensor flipped({3, 2, 3, 2});
  for (std::size_t ci = 0; ci < 2; ++ci)
    for (std::size_t co = 0; co < 3; ++co)
      for (std::size_t kh = 0; kh < 3; ++kh)
        for (std::size_t kw = 0; kw < 2; ++kw)
          flipped[((co * 2 + ci) * 3 + (2 - kh)) * 2 + (1 - kw)] = w[((ci * 3 + co) * 3 + kh) * 2 + kw];
  const Tensor ref = naive_conv(x, flipped, b, 1, 1, 2, 1);
  ASSERT_EQ(y.shape(), ref.shape());
  EXPECT_LE(max_abs_diff(y, ref), 1e-12);
}

// <conv(x), y> == <x, deconv(y)> when the deconv reuses the conv weights.
TEST(Deconv2dForward, IsAdjointOfConv) {
  Rng rng(33);
  for (std::size_t s : {1, 2})
    for (std::size_t p : {0, 1})
      for (std::size_t k : {1, 2, 3})
        for (std::size_t h : {3, 5, 6}) {
          const ConvSpec c = conv(3, 2, k, s, p);
          const Shape out = c.output_shape(h, h);
          // Choose out_pad so the deconv output lands back on h x h.
          const std::size_t base = (out[1] - 1) * s + k - 2 * p;
          ASSERT_GE(h, base);
          const std::size_t op = h - base;
          if (op >= s) continue;  // conv dropped rows the adjoint cannot recreate
          const ConvSpec d = deconv(2, 3, k, s, p, op);
          const Tensor x = random_tensor({3, h, h}, rng);
          const Tensor w = random_tensor(c.weight_shape(), rng);
          const Tensor y = random_tensor(out, rng);
          const double lhs = inner(conv2d_forward(x, c, w, Tensor({2})), y);
          const double rhs = inner(x, deconv2d_forward(y, d, w, Tensor({3})));
          EXPECT_NEAR(lhs, rhs, 1e-10) << "s=" << s << " p=" << p << " k=" << k << " h=" << h;
        }
}

TEST(Deconv2dBackward, MatchesFiniteDifferences) {
  const ConvSpec specs[] = {deconv(3, 2, 3, 2, 1, 1, Activation::kRelu), deconv(2, 3, 3, 2, 1, 0),
                            deconv(2, 2, 2, 1, 0, 0, Activation::kRelu),
                            ConvSpec{2, 2, 2, 4, 1, 1, 0, 0, 0, 0, true, Activation::kIdentity}};
  std::uint64_t seed = 200;
  for (const auto& spec : specs) {
    const auto r = check_layer_gradient(spec, 6, 7, seed++);
    EXPECT_GE(r.coordinates_checked, 100u);
    EXPECT_LE(r.max_rel_error, 1e-4) << "coordinate " << r.worst_coordinate;
  }
}

TEST(MseLoss, Examples) {
  EXPECT_EQ(mse_loss(Tensor({2}, {1, 2}), Tensor({2}, {1, 2})).value, 0.0);
  EXPECT_EQ(mse_loss(Tensor({2}, {0, 0}), Tensor({2}, {1, 1})).value, 1.0);
  const auto l = mse_loss(Tensor({2}, {1, 2}), Tensor({2}, {3, 5}));
  EXPECT_DOUBLE_EQ(l.value, 6.5);
  EXPECT_DOUBLE_EQ(l.grad[0], 2.0);  // 2*(3-1)/2
  EXPECT_DOUBLE_EQ(l.grad[1], 3.0);
  EXPECT_THROW(mse_loss(Tensor({2}), Tensor({3})), ShapeError);
}

TEST(MseLoss, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  const Tensor x = random_tensor({2, 3, 4}, rng);
  const Tensor xh = random_tensor({2, 3, 4}, rng);
  const auto l = mse_loss(x, xh);
  auto f = [&](std::span<const double> p) {
    return mse_loss(x, Tensor(x.shape(), {p.begin(), p.end()})).value;
  };
  const auto coords = pick_coordinates(xh.size(), 100, rng);
  EXPECT_LE(grad_check(f, xh.data(), l.grad.data(), coords).max_rel_error, 1e-4);
}

TEST(CosineSim, Examples) {
  const std::vector<double> e1{1, 0, 0};
  EXPECT_DOUBLE_EQ(cosine_sim(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(cosine_sim(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  const double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
  EXPECT_NEAR(cosine_sim(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}), 0.974632,
              1e-6);
  EXPECT_NEAR(cosine_sim(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}), expected,
              1e-15);
}

TEST(CosineSim, ZeroNormIsAnError) {
  const std::vector<double> z{0, 0, 0}, a{1, 2, 3};
  EXPECT_THROW(cosine_sim(z, a), DegenerateVectorError);
  EXPECT_THROW(cosine_sim(a, z), DegenerateVectorError);
  EXPECT_THROW(cosine_sim_grad(z, a), DegenerateVectorError);
  EXPECT_THROW(cosine_sim(a, std::vector<double>{1, 2}), ShapeError);
}

TEST(CosineSim, ScaleInvariant) {
  Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(16), b(16), sa(16), sb(16);
    const double alpha = rng.uniform(1e-3, 1e3), beta = rng.uniform(1e-3, 1e3);
    for (std::size_t i = 0; i < 16; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      sa[i] = alpha * a[i];
      sb[i] = beta * b[i];
    }
    EXPECT_NEAR(cosine_sim(sa, sb), cosine_sim(a, b), 1e-12);
  }
}

TEST(CosineSim, GradientMatchesFiniteDifferences) {
  Rng rng(45);
  std::vector<double> a(150), b(150);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  const auto g = cosine_sim_grad(a, b);
  EXPECT_NEAR(g.value, cosine_sim(a, b), 1e-15);
  auto f = [&](std::span<const double> p) { return cosine_sim(p, b); };
  const auto coords = pick_coordinates(a.size(), 150, rng);
  EXPECT_LE(grad_check(f, a, g.grad_a, coords).max_rel_error, 1e-4);
}

TEST(GradCheck, ReportsNonFiniteValues) {
  const std::vector<double> p{1.0}, g{1.0};
  const std::vector<std::size_t> c{0};
  auto f = [](std::span<const double>) { return std::nan(""); };
  EXPECT_THROW(grad_check(f, p, g, c), NonFiniteError);
}

TEST(GradCheck, DetectsWrongGradient) {
  const std::vector<double> p{2.0}, wrong{3.0};
  const std::vector<std::size_t> c{0};
  auto f = [](std::span<const double> x) { return x[0] * x[0]; };
  EXPECT_GT(grad_check(f, p, wrong, c).max_rel_error, 0.2);
}
