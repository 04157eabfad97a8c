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

#ifndef FLLAB_DATA_DATASET_H_
#define FLLAB_DATA_DATASET_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fllab/nn/tensor.h"
#include "fllab/util/rng.h"

namespace fllab {

// Per-image entropy defaults, in bits.
inline constexpr double kMnistEntropyBits = 567.0;
inline constexpr double kCifar10EntropyBits = 1403.0;

struct Dataset {
  Tensor images;  // [n, ...], values in [0, 1] for image data
  std::vector<int> labels;
  int num_classes = 0;
  double entropy_bits = 0.0;  // per sample

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  // Elements per sample (product of all dims but the first).
  int64_t sample_size() const;
  Shape sample_shape() const;
  std::span<const double> sample(int64_t i) const;

  // Throws InvalidArgument when an invariant is broken.
  void Validate() const;

  // Copies the listed samples, in order.
  Dataset Subset(std::span<const int64_t> indices) const;
};

// A batch gathered from a dataset.
struct Batch {
  Tensor images;
  std::vector<int> labels;
};
Batch Gather(const Dataset& data, std::span<const int64_t> indices);

struct Partition {
  std::vector<std::vector<int64_t>> user_indices;
  int num_users() const { return static_cast<int>(user_indices.size()); }
};

// Random permutation cut into N equal chunks; the n mod N leftover samples
// are dropped.
Partition PartitionIid(const Dataset& data, int num_users, uint64_t seed);

inline constexpr double kIidAlpha = std::numeric_limits<double>::infinity();

// Per-class Dirichlet(alpha) allocation. alpha = kIidAlpha gives exactly
// PartitionIid. Redraws until every user holds at least one sample.
Partition PartitionDirichlet(const Dataset& data, int num_users, double alpha, uint64_t seed,
                             int max_retries = 100);

// n draws from N(mean, cov). Images are [n, dim]; labels are all 0.
// Continuous data has no per-image entropy constant, entropy_bits is a
// nominal 1.
Dataset SynthGaussian(int dim, int64_t n, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov, uint64_t seed);

// Gaussian class clusters: class means drawn N(0, separation^2 I), unit
// within-class noise. Images are [n, dim].
Dataset SynthClassification(int dim, int64_t n, int num_classes, double separation,
                            double entropy_bits, uint64_t seed);

// B indices drawn uniformly without replacement from `indices`.
std::vector<int64_t> SampleBatch(std::span<const int64_t> indices, int64_t batch_size, Rng& rng);

}  // namespace fllab

#endif  // FLLAB_DATA_DATASET_H_
