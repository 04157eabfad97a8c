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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fllab/data/dataset.h"
#include "fllab/data/formats.h"
#include "fllab/fl/fl.h"
#include "fllab/model/model.h"
#include "fllab/util/error.h"

namespace fllab {
namespace {

std::vector<int64_t> Iota(int64_t n, int64_t from = 0) {
  std::vector<int64_t> v(static_cast<size_t>(n));
  std::iota(v.begin(), v.end(), from);
  return v;
}

double Norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

class FlTest : public ::testing::Test {
 protected:
  Dataset data_ = SynthClassification(5, 120, 3, 1.5, 10.0, 1);
  Model model_ = Model::Build(ModelSpec::For("linear", {5}, 3), 2);
};

TEST_F(FlTest, FedSgdSingleSampleMatchesClosedForm) {
  std::vector<int64_t> local = {7};
  Rng rng(1);
  ModelUpdate u = LocalUpdateFedSgd(model_, data_, local, 1, rng);
  // Softmax regression: dL/dW = a (p - e_y)^T, dL/db = p - e_y.
  Tensor logits = model_.Logits(Tensor({1, 5}, std::vector<double>(data_.sample(7).begin(),
                                                                  data_.sample(7).end())));
  std::vector<double> p(3);
  double z = 0;
  for (int c = 0; c < 3; ++c) z += (p[static_cast<size_t>(c)] = std::exp(logits[c]));
  for (double& v : p) v /= z;
  p[static_cast<size_t>(data_.labels[7])] -= 1.0;
  for (int i = 0; i < 5; ++i) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(u.values[static_cast<size_t>(i * 3 + c)], data_.sample(7)[static_cast<size_t>(i)] * p[static_cast<size_t>(c)], 1e-14);
    }
  }
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(u.values[static_cast<size_t>(15 + c)], p[static_cast<size_t>(c)], 1e-14);
}

TEST_F(FlTest, FedSgdDuplicatedBatchEqualsSingle) {
  std::vector<int64_t> dup = {4, 4, 4, 4};
  std::vector<int64_t> one = {4};
  Rng a(1), b(2);
  ModelUpdate x4 = LocalUpdateFedSgd(model_, data_, dup, 4, a);
  ModelUpdate x1 = LocalUpdateFedSgd(model_, data_, one, 1, b);
  for (size_t j = 0; j < x1.values.size(); ++j) EXPECT_NEAR(x4.values[j], x1.values[j], 1e-15);
}

TEST_F(FlTest, FedSgdUnionIsMeanOfHalves) {
  auto first = Iota(6), second = Iota(6, 6), both = Iota(12);
  Rng r(3);
  ModelUpdate a = LocalUpdateFedSgd(model_, data_, first, 6, r);
  ModelUpdate b = LocalUpdateFedSgd(model_, data_, second, 6, r);
  ModelUpdate ab = LocalUpdateFedSgd(model_, data_, both, 12, r);
  for (size_t j = 0; j < ab.values.size(); ++j) {
    EXPECT_NEAR(ab.values[j], 0.5 * (a.values[j] + b.values[j]), 1e-14);
  }
  std::vector<int64_t> empty;
  EXPECT_THROW(LocalUpdateFedSgd(model_, data_, empty, 1, r), InvalidArgument);
}

TEST_F(FlTest, FedAvgSingleFullBatchEpochIsGradient) {
  auto local = Iota(20);
  Rng r1(4), r2(5);
  ModelUpdate avg = LocalUpdateFedAvg(model_, data_, local, 1, 20, 0.3, r1);
  ModelUpdate sgd = LocalUpdateFedSgd(model_, data_, local, 20, r2);
  for (size_t j = 0; j < avg.values.size(); ++j) EXPECT_NEAR(avg.values[j], sgd.values[j], 1e-12);
}

TEST_F(FlTest, FedAvgSmallStepApproachesSummedGradients) {
  auto local = Iota(40);
  const int epochs = 2, batch = 10;
  Rng r1(6), r2(7);
  ModelUpdate avg = LocalUpdateFedAvg(model_, data_, local, epochs, batch, 1e-4, r1);
  ModelUpdate full = LocalUpdateFedSgd(model_, data_, local, 40, r2);
  const double steps = epochs * (40 / batch);
  std::vector<double> diff(avg.values.size());
  for (size_t j = 0; j < diff.size(); ++j) diff[j] = avg.values[j] - steps * full.values[j];
  EXPECT_LT(Norm(diff) / (steps * Norm(full.values)), 0.05);
}

TEST_F(FlTest, FedAvgDeterministic) {
  auto local = Iota(30);
  Rng a(8), b(8);
  EXPECT_EQ(LocalUpdateFedAvg(model_, data_, local, 3, 7, 0.1, a).values,
            LocalUpdateFedAvg(model_, data_, local, 3, 7, 0.1, b).values);
}

TEST_F(FlTest, FedProxZeroMuIsFedAvg) {
  auto local = Iota(30);
  Rng a(9), b(9);
  EXPECT_EQ(LocalUpdateFedProx(model_, data_, local, 2, 8, 0.2, 0.0, a).values,
            LocalUpdateFedAvg(model_, data_, local, 2, 8, 0.2, b).values);
  EXPECT_THROW(LocalUpdateFedProx(model_, data_, local, 2, 8, 0.2, -1.0, a), InvalidArgument);
}

TEST_F(FlTest, FedProxShrinksWithMu) {
  auto local = Iota(40);
  double prev = INFINITY;
  for (double mu : {0.0, 10.0, 100.0, 1000.0, 1e4}) {
    Rng r(10);
    const double n = Norm(LocalUpdateFedProx(model_, data_, local, 5, 4, 1e-4, mu, r).values);
    EXPECT_LT(n, prev) << mu;
    prev = n;
  }
}

TEST(SampleClientsTest, FullSetAndDeterminism) {
  EXPECT_EQ(SampleClients(5, 5, 3, 1), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(SampleClients(50, 7, 3, 1), SampleClients(50, 7, 3, 1));
  EXPECT_NE(SampleClients(50, 7, 3, 1), SampleClients(50, 7, 4, 1));
  EXPECT_THROW(SampleClients(5, 6, 0, 1), InvalidArgument);
  EXPECT_THROW(SampleClients(5, 0, 0, 1), InvalidArgument);
}

TEST(SampleClientsTest, ParticipationFrequency) {
  const int n = 20, k = 5, rounds = 10000;
  std::vector<int> counts(n, 0);
  for (int t = 0; t < rounds; ++t) {
    for (int u : SampleClients(n, k, t, 42)) ++counts[static_cast<size_t>(u)];
  }
  const double p = static_cast<double>(k) / n, sd = std::sqrt(rounds * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - rounds * p), 3 * sd + 1);
}

TEST(ServerStepTest, Examples) {
  std::vector<double> theta = {1, 2, 3};
  std::vector<ModelUpdate> zero = {{0, 0, {0, 0, 0}}, {1, 0, {0, 0, 0}}};
  EXPECT_EQ(ServerStep(theta, zero, 0.5), theta);
  std::vector<ModelUpdate> one = {{0, 0, {1, -1, 2}}};
  EXPECT_EQ(ServerStep(theta, one, 0.5), (std::vector<double>{0.5, 2.5, 2}));
  std::vector<ModelUpdate> opposite = {{0, 0, {1, -1, 2}}, {1, 0, {-1, 1, -2}}};
  EXPECT_EQ(ServerStep(theta, opposite, 0.5), theta);
  std::vector<ModelUpdate> mixed = {{0, 0, {1, 1, 1}}, {1, 1, {1, 1, 1}}};
  EXPECT_THROW(ServerStep(theta, mixed, 0.5), InvalidArgument);
  std::vector<ModelUpdate> short_update = {{0, 0, {1}}};
  EXPECT_THROW(ServerStep(theta, short_update, 0.5), InvalidArgument);
}

class TrainTest : public ::testing::Test {
 protected:
  Dataset data_ = SynthClassification(8, 400, 4, 1.0, 10.0, 3);
  Model model_ = Model::Build(ModelSpec::For("linear", {8}, 4), 4);
  FlConfig Config() const {
    FlConfig c;
    c.num_users = 4;
    c.batch_size = 10;
    c.rounds = 5;
    c.learning_rate = 0.5;
    c.seed = 11;
    return c;
  }
};

TEST_F(TrainTest, ZeroRoundsIsEmpty) {
  FlConfig c = Config();
  c.rounds = 0;
  Model final_model = model_;
  auto logs = Train(c, data_, PartitionIid(data_, 4, 1), model_, nullptr, &final_model);
  EXPECT_TRUE(logs.empty());
  EXPECT_TRUE(std::equal(final_model.params().begin(), final_model.params().end(),
                         model_.params().begin()));
}

TEST_F(TrainTest, Deterministic) {
  FlConfig c = Config();
  c.dropout_prob = 0.3;
  c.clients_per_round = 3;
  auto a = Train(c, data_, PartitionIid(data_, 4, 1), model_);
  auto b = Train(c, data_, PartitionIid(data_, 4, 1), model_);
  ASSERT_EQ(a.size(), b.size());
  for (size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].aggregate, b[t].aggregate);
    EXPECT_EQ(a[t].survivors, b[t].survivors);
    EXPECT_EQ(a[t].accuracy, b[t].accuracy);
  }
}

TEST_F(TrainTest, AggregateMatchesMeanOfUpdates) {
  for (bool sa : {false, true}) {
    FlConfig c = Config();
    c.secure_aggregation = sa;
    c.dropout_prob = 0.25;
    auto logs = Train(c, data_, PartitionIid(data_, 4, 1), model_);
    const double tol = sa ? SaTolerance(QuantSpec::ForUsers(4), 4) + 1e-15 : 1e-15;
    for (const auto& log : logs) {
      if (log.survivors.empty()) continue;
      for (size_t j = 0; j < log.aggregate.size(); ++j) {
        double mean = 0;
        for (const auto& u : log.updates) mean += u.values[j];
        mean /= static_cast<double>(log.updates.size());
        EXPECT_NEAR(log.aggregate[j], mean, tol);
      }
    }
  }
}

TEST_F(TrainTest, RepetitionsShareGlobalModel) {
  FlSimulator sim(Config(), data_, PartitionIid(data_, 4, 1), model_);
  RoundLog a = sim.RunRound(0), b = sim.RunRound(1), a2 = sim.RunRound(0);
  EXPECT_EQ(a.params_before, b.params_before);
  EXPECT_NE(a.updates[0].values, b.updates[0].values);
  EXPECT_EQ(a.aggregate, a2.aggregate);
}

TEST_F(TrainTest, ValidationRejectsBadConfig) {
  FlConfig c = Config();
  c.clients_per_round = 5;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Config();
  c.batch_size = 200;
  EXPECT_THROW(FlSimulator(c, data_, PartitionIid(data_, 4, 1), model_), ConfigError);
  c = Config();
  c.learning_rate = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(TrainMnistTest, LinearFedSgdReachesBaselineAccuracy) {
  Dataset all = LoadBundledMnist();
  std::vector<int64_t> perm = Iota(all.size());
  Rng rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset train = all.Subset(std::span(perm).subspan(0, 2000));
  Dataset test = all.Subset(std::span(perm).subspan(2000));
  FlConfig c;
  c.num_users = 10;
  c.rounds = 30;
  c.batch_size = 32;
  c.seed = 3;
  Model m = Model::Build(ModelSpec::For("linear", {1, 28, 28}, 10), 5);
  auto logs = Train(c, train, PartitionIid(train, 10, 2), m, &test);
  ASSERT_EQ(logs.size(), 30u);
  EXPECT_GT(logs.back().accuracy, 0.75);
}

}  // namespace
}  // namespace fllab
