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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "fllab/data/dataset.h"
#include "fllab/data/formats.h"
#include "fllab/util/error.h"
#include "fllab/util/stats.h"

namespace fllab {
namespace {

std::vector<uint8_t> IdxHeader(uint32_t magic, std::vector<uint32_t> dims) {
  std::vector<uint8_t> out;
  auto put = [&](uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
  };
  put(magic);
  for (uint32_t d : dims) put(d);
  return out;
}

Dataset ToySet(int64_t n, int classes) {
  Dataset d{Tensor({n, 2}), std::vector<int>(static_cast<size_t>(n)), classes, 1.0};
  for (int64_t i = 0; i < n; ++i) d.labels[static_cast<size_t>(i)] = static_cast<int>(i % classes);
  return d;
}

void ExpectDisjointCovering(const Partition& p, int64_t n, bool exact_cover) {
  std::vector<int> seen(static_cast<size_t>(n), 0);
  int64_t total = 0;
  for (const auto& part : p.user_indices) {
    for (int64_t i : part) {
      ASSERT_GE(i, 0);
      ASSERT_LT(i, n);
      ++seen[static_cast<size_t>(i)];
      ++total;
    }
  }
  for (int c : seen) EXPECT_LE(c, 1);
  if (exact_cover) EXPECT_EQ(total, n);
}

TEST(IdxTest, ParsesHandBuiltImages) {
  auto bytes = IdxHeader(0x803, {2, 28, 28});
  for (int i = 0; i < 1568; ++i) bytes.push_back(static_cast<uint8_t>(i % 256));
  bytes[16 + 5] = 255;
  IdxArray a = ParseIdx(bytes);
  Tensor t = a.ToImages();
  EXPECT_EQ(t.shape(), (Shape{2, 28, 28}));
  EXPECT_EQ(t[5], 1.0);
  EXPECT_EQ(t[0], 0.0);
}

TEST(IdxTest, RejectsUnknownMagic) {
  auto bytes = IdxHeader(0x802, {1});
  bytes.push_back(0);
  try {
    ParseIdx(bytes);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("unknown IDX magic"), std::string::npos);
  }
}

TEST(IdxTest, RejectsTruncatedPayload) {
  auto bytes = IdxHeader(0x801, {5});
  bytes.push_back(1);
  EXPECT_THROW(ParseIdx(bytes), InvalidArgument);
  EXPECT_THROW(ParseIdx(std::vector<uint8_t>{0, 0, 8}), InvalidArgument);
}

TEST(IdxTest, RoundTripIsBitExact) {
  auto bytes = IdxHeader(0x803, {3, 4, 5});
  for (int i = 0; i < 60; ++i) bytes.push_back(static_cast<uint8_t>(i * 37));
  EXPECT_EQ(SerializeIdx(ParseIdx(bytes)), bytes);
  auto labels = IdxHeader(0x801, {4});
  for (uint8_t v : {3, 1, 4, 1}) labels.push_back(v);
  EXPECT_EQ(SerializeIdx(ParseIdx(labels)), labels);
  EXPECT_EQ(ParseIdx(labels).ToLabels(), (std::vector<int>{3, 1, 4, 1}));
}

TEST(CifarTest, ZeroRecords) {
  std::vector<uint8_t> bytes(2 * 3073, 0);
  Dataset d = ParseCifar10(bytes);
  EXPECT_EQ(d.images.shape(), (Shape{2, 3, 32, 32}));
  EXPECT_EQ(d.labels, (std::vector<int>{0, 0}));
  for (double v : d.images.storage()) EXPECT_EQ(v, 0.0);
}

TEST(CifarTest, CountsRecordsAndRejectsBadInput) {
  std::vector<uint8_t> bytes(5 * 3073, 7);
  for (int i = 0; i < 5; ++i) bytes[static_cast<size_t>(i) * 3073] = static_cast<uint8_t>(i);
  Dataset d = ParseCifar10(bytes);
  EXPECT_EQ(d.size(), 5);
  EXPECT_EQ(SerializeCifar10(d), bytes);
  bytes[3073] = 10;
  EXPECT_THROW(ParseCifar10(bytes), InvalidArgument);
  bytes.pop_back();
  EXPECT_THROW(ParseCifar10(bytes), InvalidArgument);
}

TEST(MnistTest, BundledSubsetLoads) {
  Dataset d = LoadBundledMnist();
  EXPECT_EQ(d.size(), 5000);
  EXPECT_EQ(d.images.shape(), (Shape{5000, 1, 28, 28}));
  EXPECT_EQ(d.entropy_bits, 567.0);
  EXPECT_TRUE(std::all_of(d.images.storage().begin(), d.images.storage().end(),
                          [](double v) { return v >= 0.0 && v <= 1.0; }));
  std::set<int> classes(d.labels.begin(), d.labels.end());
  EXPECT_EQ(classes.size(), 10u);
}

TEST(PartitionTest, IidEqualChunks) {
  Dataset mnist_sized = ToySet(60000, 10);
  Partition p = PartitionIid(mnist_sized, 50, 1);
  for (const auto& part : p.user_indices) EXPECT_EQ(part.size(), 1200u);
  ExpectDisjointCovering(p, 60000, true);
  Partition cifar = PartitionIid(ToySet(50000, 10), 50, 1);
  for (const auto& part : cifar.user_indices) EXPECT_EQ(part.size(), 1000u);
}

TEST(PartitionTest, IidSingleUserAndRemainder) {
  Dataset d = ToySet(103, 3);
  Partition one = PartitionIid(d, 1, 4);
  ASSERT_EQ(one.num_users(), 1);
  EXPECT_EQ(one.user_indices[0].size(), 103u);
  Partition ten = PartitionIid(d, 10, 4);
  for (const auto& part : ten.user_indices) EXPECT_EQ(part.size(), 10u);
  ExpectDisjointCovering(ten, 103, false);
  EXPECT_THROW(PartitionIid(d, 0, 1), InvalidArgument);
  EXPECT_THROW(PartitionIid(d, 104, 1), InvalidArgument);
}

TEST(PartitionTest, IidDeterministic) {
  Dataset d = ToySet(100, 2);
  EXPECT_EQ(PartitionIid(d, 4, 9).user_indices, PartitionIid(d, 4, 9).user_indices);
  EXPECT_NE(PartitionIid(d, 4, 9).user_indices, PartitionIid(d, 4, 10).user_indices);
}

TEST(PartitionTest, DirichletInfinityIsIid) {
  Dataset d = ToySet(200, 4);
  EXPECT_EQ(PartitionDirichlet(d, 5, kIidAlpha, 3).user_indices,
            PartitionIid(d, 5, 3).user_indices);
}

TEST(PartitionTest, DirichletSmallAlphaIsDegenerate) {
  Dataset d = ToySet(200, 2);
  int degenerate_seeds = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Partition p = PartitionDirichlet(d, 2, 0.01, seed);
    bool all_degenerate = true;
    for (const auto& part : p.user_indices) {
      ASSERT_FALSE(part.empty());
      int ones = 0;
      for (int64_t i : part) ones += d.labels[static_cast<size_t>(i)];
      const double share = std::max(ones, static_cast<int>(part.size()) - ones) /
                           static_cast<double>(part.size());
      all_degenerate = all_degenerate && share > 0.9;
    }
    degenerate_seeds += all_degenerate;
  }
  EXPECT_GE(degenerate_seeds, 80);
}

TEST(PartitionTest, DirichletDisjointAndCoveringForAnyAlpha) {
  Dataset d = ToySet(300, 5);
  for (double alpha : {0.05, 0.5, 1.0, 10.0, 1000.0}) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      Partition p = PartitionDirichlet(d, 6, alpha, seed);
      ExpectDisjointCovering(p, 300, true);
      for (const auto& part : p.user_indices) EXPECT_FALSE(part.empty());
    }
  }
  EXPECT_THROW(PartitionDirichlet(d, 3, 0.0, 1), InvalidArgument);
}

TEST(PartitionTest, DirichletRetryBoundExceeded) {
  // One sample per class and fewer samples than users can never fill everyone.
  Dataset d = ToySet(3, 3);
  EXPECT_THROW(PartitionDirichlet(d, 3, 1e-3, 1, 5), InvalidArgument);
}

TEST(SynthGaussianTest, IndependentCoordinates) {
  Dataset d = SynthGaussian(2, 10000, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 1);
  std::vector<double> a, b;
  for (int64_t i = 0; i < d.size(); ++i) {
    a.push_back(d.images.at(i, 0));
    b.push_back(d.images.at(i, 1));
  }
  double sab = 0;
  for (size_t i = 0; i < a.size(); ++i) sab += (a[i] - Mean(a)) * (b[i] - Mean(b));
  const double corr = sab / (a.size() - 1) / (SampleStdDev(a) * SampleStdDev(b));
  EXPECT_LT(std::abs(corr), 0.1);
}

TEST(SynthGaussianTest, ZeroCovarianceAndDeterminism) {
  Eigen::VectorXd mean(3);
  mean << 1, -2, 0.5;
  Dataset d = SynthGaussian(3, 20, mean, Eigen::MatrixXd::Zero(3, 3), 5);
  for (int64_t i = 0; i < 20; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(d.images.at(i, j), mean[j]);
  }
  Eigen::MatrixXd cov(2, 2);
  cov << 2, 0.5, 0.5, 1;
  EXPECT_EQ(SynthGaussian(2, 50, Eigen::VectorXd::Zero(2), cov, 8).images,
            SynthGaussian(2, 50, Eigen::VectorXd::Zero(2), cov, 8).images);
  cov << 1, 2, 2, 1;
  EXPECT_THROW(SynthGaussian(2, 5, Eigen::VectorXd::Zero(2), cov, 8), InvalidArgument);
}

TEST(SampleBatchTest, FullBatchIsPermutation) {
  std::vector<int64_t> idx = {4, 8, 15, 16, 23, 42};
  Rng rng(1);
  auto b = SampleBatch(idx, 6, rng);
  std::sort(b.begin(), b.end());
  EXPECT_EQ(b, idx);
  EXPECT_THROW(SampleBatch(idx, 7, rng), InvalidArgument);
}

TEST(SampleBatchTest, SingleDrawsAreUniform) {
  std::vector<int64_t> idx = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng rng(2);
  std::vector<int> counts(10, 0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<size_t>(SampleBatch(idx, 1, rng)[0])];
  const double p = 0.1, sd = std::sqrt(draws * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - draws * p), 3 * sd + 1);
}

TEST(SampleBatchTest, DeterministicUnderRngState) {
  std::vector<int64_t> idx(50);
  for (int i = 0; i < 50; ++i) idx[static_cast<size_t>(i)] = i;
  Rng a(3), b(3);
  EXPECT_EQ(SampleBatch(idx, 10, a), SampleBatch(idx, 10, b));
}

}  // namespace
}  // namespace fllab
