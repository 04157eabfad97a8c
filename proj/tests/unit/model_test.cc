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

#include <vector>

#include <gtest/gtest.h>

#include "fllab/data/dataset.h"
#include "fllab/model/model.h"
#include "fllab/nn/ops.h"
#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

const Shape kMnist = {1, 28, 28};
const Shape kCifar = {3, 32, 32};

TEST(ModelTest, ParameterCounts) {
  EXPECT_EQ(Model::Build(ModelSpec::For("mlp", kMnist, 10), 0).num_params(), 89610);
  EXPECT_EQ(Model::Build(ModelSpec::For("linear", kCifar, 10), 0).num_params(), 30730);
  EXPECT_EQ(Model::Build(ModelSpec::For("linear", kMnist, 10), 0).num_params(), 7850);
  EXPECT_EQ(Model::Build(ModelSpec::For("slp", kMnist, 10), 0).num_params(), 7850);
  // conv 1->8 (208) + conv 8->16 (3216) + fc 256->10 (2570).
  EXPECT_EQ(Model::Build(ModelSpec::For("cnn", kMnist, 10), 0).num_params(), 5994);
  EXPECT_THROW(ModelSpec::For("alexnet", kMnist, 10), InvalidArgument);
}

TEST(ModelTest, LayoutIsContiguous) {
  for (const char* tag : {"linear", "slp", "mlp", "cnn"}) {
    Model m = Model::Build(ModelSpec::For(tag, kCifar, 10), 1);
    int64_t next = 0;
    for (const auto& e : m.layout()) {
      EXPECT_EQ(e.offset, next) << tag;
      next += e.size();
    }
    EXPECT_EQ(next, m.num_params()) << tag;
  }
}

TEST(ModelTest, FlattenRoundTrip) {
  for (const char* tag : {"linear", "slp", "mlp", "cnn"}) {
    Model m = Model::Build(ModelSpec::For(tag, kMnist, 10), 2);
    FlatParams flat = m.Flatten();
    Model other = Model::Build(ModelSpec::For(tag, kMnist, 10), 3);
    other.Unflatten(flat);
    EXPECT_EQ(other.Flatten().values, flat.values) << tag;
    flat.values.pop_back();
    EXPECT_THROW(other.Unflatten(flat), InvalidArgument);
  }
  Model zero = Model::Build(ModelSpec::For("mlp", kMnist, 10), 0, Init::kZero);
  for (double v : zero.params()) EXPECT_EQ(v, 0.0);
}

TEST(ModelTest, InitWithinFanInBound) {
  Model m = Model::Build(ModelSpec::For("linear", kMnist, 10), 4);
  for (double v : m.params()) EXPECT_LE(std::abs(v), 1.0 / 28.0);
}

TEST(ModelTest, ConstantPredictorIsChance) {
  Dataset d{Tensor({100, 4}), std::vector<int>(100), 10, 1.0};
  for (int i = 0; i < 100; ++i) d.labels[static_cast<size_t>(i)] = i % 10;
  Model m = Model::Build(ModelSpec::For("linear", {4}, 10), 0, Init::kZero);
  m.mutable_params()[m.num_params() - 10 + 3] = 1.0;  // bias favors class 3
  EXPECT_DOUBLE_EQ(Evaluate(m, d), 0.1);
}

TEST(ModelTest, MemorizerIsPerfect) {
  // One-hot inputs and an identity weight map each sample to its label.
  Dataset d{Tensor({5, 5}), {0, 1, 2, 3, 4}, 5, 1.0};
  for (int i = 0; i < 5; ++i) d.images.at(i, i) = 1.0;
  Model m = Model::Build(ModelSpec::For("linear", {5}, 5), 0, Init::kZero);
  for (int i = 0; i < 5; ++i) m.mutable_params()[i * 5 + i] = 1.0;
  EXPECT_DOUBLE_EQ(Evaluate(m, d), 1.0);
  Dataset wrong = d;
  wrong.num_classes = 6;
  EXPECT_THROW(Evaluate(m, wrong), InvalidArgument);
}

TEST(ModelTest, GradientsMatchFiniteDifferences) {
  for (const char* tag : {"linear", "slp", "mlp", "cnn"}) {
    ModelSpec spec = ModelSpec::For(tag, {1, 13, 13}, 3);
    spec.hidden = {6, 5};
    Model m = Model::Build(spec, 5);
    Rng rng(6);
    Tensor x({4, 1, 13, 13});
    for (double& v : x.data()) v = UniformDouble(rng, 0, 1);
    std::vector<int> y = {0, 2, 1, 2};
    Objective f = [&](std::span<const double> p, std::vector<double>* g) {
      Model copy = m;
      copy.SetParams(p);
      return copy.LossAndGradient(x, y, g);
    };
    std::vector<double> p(m.params().begin(), m.params().end());
    EXPECT_LT(GradCheck(f, p, 1e-5), 1e-4) << tag;
  }
}

TEST(ModelTest, PerExampleGradientsAverageToBatchGradient) {
  Model m = Model::Build(ModelSpec::For("mlp", {7}, 3), 7);
  Rng rng(8);
  Tensor x({5, 7});
  for (double& v : x.data()) v = UniformDouble(rng, -1, 1);
  std::vector<int> y = {0, 1, 2, 1, 0};
  std::vector<double> g;
  m.LossAndGradient(x, y, &g);
  Tensor per = m.PerExampleGradients(x, y);
  for (int64_t j = 0; j < m.num_params(); ++j) {
    double s = 0;
    for (int64_t b = 0; b < 5; ++b) s += per.at(b, j);
    EXPECT_NEAR(s / 5.0, g[static_cast<size_t>(j)], 1e-12);
  }
}

TEST(ModelTest, EvaluateIsDeterministic) {
  Dataset d = SynthClassification(6, 300, 3, 2.0, 1.0, 9);
  Model m = Model::Build(ModelSpec::For("mlp", {6}, 3), 10);
  const double a = Evaluate(m, d);
  EXPECT_EQ(a, Evaluate(m, d));
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

}  // namespace
}  // namespace fllab
