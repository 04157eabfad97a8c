//
// Copyright 2026 The fllab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fllab/nn/grad_tape.h"
#include "fllab/nn/ops.h"
#include "fllab/nn/tensor.h"
#include "fllab/util/error.h"
#include "fllab/util/rng.h"
#include "gradient_cases.h"

namespace fllab {
namespace {

Tensor RandomTensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = UniformDouble(rng, -1.0, 1.0);
  return t;
}

// Sum of w_k * y_k with fixed random weights, so every output element gets a
// distinct upstream gradient.
double WeightedSum(const Tensor& y, const Tensor& w) {
  double s = 0.0;
  for (int64_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

TEST(TensorTest, RejectsWrongDataLength) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(TensorTest, ReshapeKeepsData) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor r = t.Reshaped({3, 2});
  EXPECT_EQ(r.storage(), t.storage());
  EXPECT_THROW(t.Reshaped({4}), InvalidArgument);
}

TEST(AffineTest, Identity) {
  Tensor eye = Tensor::FromMatrix({{1, 0}, {0, 1}});
  EXPECT_EQ(AffineForward(eye, eye, Tensor({2})), eye);
}

TEST(AffineTest, HandArithmetic) {
  Tensor y = AffineForward(Tensor::FromMatrix({{1, 2}}), Tensor::FromMatrix({{1}, {1}}),
                           Tensor({1}, {3.0}));
  EXPECT_EQ(y.shape(), (Shape{1, 1}));
  EXPECT_DOUBLE_EQ(y[0], 6.0);
}

TEST(AffineTest, ZeroWeights) {
  Rng rng(1);
  Tensor y = AffineForward(RandomTensor({4, 3}, rng), Tensor({3, 5}), Tensor({5}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(AffineTest, ShapeMismatchNamesShapes) {
  try {
    AffineForward(Tensor({2, 3}), Tensor({4, 5}), Tensor({5}));
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[4, 5]"), std::string::npos);
  }
}

TEST(ReluTest, ForwardAndSubgradient) {
  Tensor x({3}, {-1, 0, 2});
  EXPECT_EQ(ReluForward(x).storage(), (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(ReluBackward(x, Tensor({3}, 1.0)).storage(), (std::vector<double>{0, 0, 1}));
  Tensor neg({4}, -2.0);
  EXPECT_EQ(ReluForward(neg), Tensor({4}));
  EXPECT_EQ(ReluBackward(neg, Tensor({4}, 1.0)), Tensor({4}));
}

TEST(ConvTest, OneByOneIdentity) {
  Rng rng(2);
  Tensor x = RandomTensor({2, 1, 4, 5}, rng);
  Tensor y = Conv2dForward(x, Tensor({1, 1, 1, 1}, 1.0), Tensor(), {1, 0});
  EXPECT_EQ(y, x);
}

TEST(ConvTest, AllOnesSum) {
  Tensor y = Conv2dForward(Tensor({1, 1, 3, 3}, 1.0), Tensor({1, 1, 3, 3}, 1.0), Tensor(), {1, 0});
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(y[0], 9.0);
}

TEST(ConvTest, OutputSizeAndBadGeometry) {
  EXPECT_EQ(ConvOutputSize(28, 5, 2, 0), 12);
  EXPECT_EQ(ConvOutputSize(32, 5, 2, 2), 16);
  EXPECT_THROW(ConvOutputSize(3, 5, 1, 0), InvalidArgument);
  EXPECT_THROW(ConvOutputSize(3, 1, 0, 0), InvalidArgument);
}

TEST(XentTest, UniformLogits) {
  std::vector<int> labels = {3};
  EXPECT_NEAR(SoftmaxXent(Tensor({1, 10}), labels).loss, std::log(10.0), 1e-15);
}

TEST(XentTest, SaturatedLogits) {
  Tensor logits({1, 4});
  logits[2] = 1e6;
  std::vector<int> labels = {2};
  EXPECT_NEAR(SoftmaxXent(logits, labels).loss, 0.0, 1e-12);
}

TEST(XentTest, RejectsOutOfRangeLabel) {
  std::vector<int> labels = {4};
  EXPECT_THROW(SoftmaxXent(Tensor({1, 4}), labels), InvalidArgument);
  labels = {-1};
  EXPECT_THROW(SoftmaxXent(Tensor({1, 4}), labels), InvalidArgument);
}

TEST(XentTest, FiniteDifferences) {
  Rng rng(3);
  Tensor logits = RandomTensor({3, 4}, rng);
  std::vector<int> labels = {0, 3, 1};
  Objective f = [&](std::span<const double> p, std::vector<double>* g) {
    XentResult r = SoftmaxXent(Tensor({3, 4}, std::vector<double>(p.begin(), p.end())), labels);
    if (g) *g = r.dlogits.storage();
    return r.loss;
  };
  EXPECT_LT(GradCheck(f, logits.storage(), 1e-6), 1e-4);
}

TEST(GradCheckTest, Quadratic) {
  Objective f = [](std::span<const double> p, std::vector<double>* g) {
    if (g) *g = {2.0 * p[0]};
    return p[0] * p[0];
  };
  std::vector<double> x = {3.0};
  EXPECT_LT(GradCheck(f, x, 1e-5), 1e-8);
}

TEST(GradCheckTest, Constant) {
  Objective f = [](std::span<const double> p, std::vector<double>* g) {
    if (g) g->assign(p.size(), 0.0);
    return 7.0;
  };
  std::vector<double> x = {1.0, -2.0};
  EXPECT_EQ(GradCheck(f, x, 1e-5), 0.0);
}

TEST(GradCheckTest, LinearModelOnRandomSamples) {
  Rng rng(4);
  Tensor x = RandomTensor({5, 3}, rng);
  std::vector<int> labels = {0, 1, 2, 1, 0};
  std::vector<double> theta(3 * 3 + 3);
  for (double& v : theta) v = UniformDouble(rng, -1, 1);
  Objective f = [&](std::span<const double> p, std::vector<double>* g) {
    GradTape tape;
    auto xi = tape.Constant(x);
    auto w = tape.Variable(Tensor({3, 3}, std::vector<double>(p.begin(), p.begin() + 9)));
    auto b = tape.Variable(Tensor({3}, std::vector<double>(p.begin() + 9, p.end())));
    auto y = tape.Affine(xi, w, b);
    XentResult r = SoftmaxXent(tape.value(y), labels);
    if (g) {
      tape.Backward(y, r.dlogits);
      *g = tape.grad(w).storage();
      g->insert(g->end(), tape.grad(b).data().begin(), tape.grad(b).data().end());
    }
    return r.loss;
  };
  EXPECT_LT(GradCheck(f, theta, 1e-6), 1e-4);
}

TEST(GradCheckTest, NonFiniteThrows) {
  Objective f = [](std::span<const double> p, std::vector<double>* g) {
    if (g) *g = {1.0};
    return p[0] > 0 ? std::log(-1.0) : 0.0;
  };
  std::vector<double> x = {1.0};
  EXPECT_THROW(GradCheck(f, x, 1e-5), NumericalError);
}

// Randomized finite-difference sweep over every differentiable op.
class OpGradientTest : public ::testing::TestWithParam<int> {};

TEST_P(OpGradientTest, AffineMatchesFiniteDifferences) {
  EXPECT_LT(test_support::GradCaseError(test_support::GradOp::kAffine, GetParam()), 1e-4);
}

TEST_P(OpGradientTest, ReluMatchesFiniteDifferences) {
  EXPECT_LT(test_support::GradCaseError(test_support::GradOp::kRelu, GetParam()), 1e-4);
}

TEST_P(OpGradientTest, Conv2dMatchesFiniteDifferences) {
  EXPECT_LT(test_support::GradCaseError(test_support::GradOp::kConv2d, GetParam()), 1e-4);
}

TEST_P(OpGradientTest, MaxPoolMatchesFiniteDifferences) {
  EXPECT_LT(test_support::GradCaseError(test_support::GradOp::kMaxPool, GetParam()), 1e-4);
}

TEST_P(OpGradientTest, SoftmaxXentMatchesFiniteDifferences) {
  EXPECT_LT(test_support::GradCaseError(test_support::GradOp::kSoftmaxXent, GetParam()), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Randomized, OpGradientTest, ::testing::Range(0, 100));

TEST(GradTapeTest, VisitsEachNodeOnceAndSumsLosses) {
  Rng rng(5);
  GradTape tape;
  auto x = tape.Constant(RandomTensor({3, 4}, rng));
  auto w = tape.Variable(RandomTensor({4, 4}, rng));
  auto b = tape.Variable(RandomTensor({4}, rng));
  auto h = tape.Relu(tape.Affine(x, w, b));
  // w is used twice; its gradient must combine both uses.
  auto y = tape.Affine(h, w, b);
  Tensor seed = RandomTensor(tape.value(y).shape(), rng);
  tape.Backward(y, seed);
  for (int id = 0; id < tape.size(); ++id) EXPECT_LE(tape.visits(id), 1);
  EXPECT_EQ(tape.visits(w), 1);

  // Gradient of a sum of two seeded objectives equals the sum of gradients.
  Tensor s1 = RandomTensor(seed.shape(), rng), s2 = RandomTensor(seed.shape(), rng);
  Tensor s12 = s1;
  for (int64_t i = 0; i < s12.size(); ++i) s12[i] += s2[i];
  tape.Backward(y, s1);
  Tensor g1 = tape.grad(w);
  tape.Backward(y, s2);
  Tensor g2 = tape.grad(w);
  tape.Backward(y, s12);
  for (int64_t i = 0; i < g1.size(); ++i) {
    EXPECT_NEAR(tape.grad(w)[i], g1[i] + g2[i], 1e-12);
  }
}

TEST(GradTapeTest, ConvNetMatchesFiniteDifferences) {
  Rng rng(6);
  Tensor x = RandomTensor({2, 1, 6, 6}, rng);
  Tensor k0 = RandomTensor({2, 1, 3, 3}, rng), b0 = RandomTensor({2}, rng);
  Tensor w1 = RandomTensor({8, 3}, rng), b1 = RandomTensor({3}, rng);
  std::vector<int> labels = {1, 2};
  std::vector<double> p = k0.storage();
  for (const Tensor* t : {&b0, &w1, &b1}) p.insert(p.end(), t->storage().begin(), t->storage().end());
  Objective f = [&](std::span<const double> q, std::vector<double>* g) {
    auto it = q.begin();
    auto take = [&](const Shape& s) {
      Tensor t(s, std::vector<double>(it, it + NumElements(s)));
      it += NumElements(s);
      return t;
    };
    GradTape tape;
    auto xi = tape.Constant(x);
    auto k = tape.Variable(take(k0.shape()));
    auto kb = tape.Variable(take(b0.shape()));
    auto w = tape.Variable(take(w1.shape()));
    auto wb = tape.Variable(take(b1.shape()));
    auto c = tape.Relu(tape.Conv2d(xi, k, kb, {2, 1}));
    auto pooled = tape.MaxPool2d(c, 2, 1);
    auto flat = tape.Reshape(pooled, {2, 8});
    auto logits = tape.Affine(flat, w, wb);
    XentResult r = SoftmaxXent(tape.value(logits), labels);
    if (g) {
      tape.Backward(logits, r.dlogits);
      g->clear();
      for (auto id : {k, kb, w, wb}) {
        g->insert(g->end(), tape.grad(id).storage().begin(), tape.grad(id).storage().end());
      }
    }
    return r.loss;
  };
  EXPECT_LT(GradCheck(f, p, 1e-6), 1e-4);
}

TEST(DeterminismTest, ForwardIsBitIdentical) {
  Rng rng(7);
  Tensor x = RandomTensor({3, 2, 7, 7}, rng), k = RandomTensor({4, 2, 3, 3}, rng),
         b = RandomTensor({4}, rng);
  EXPECT_EQ(Conv2dForward(x, k, b, {2, 1}), Conv2dForward(x, k, b, {2, 1}));
}

}  // namespace
}  // namespace fllab
