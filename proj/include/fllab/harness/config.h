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

// Experiment configuration: an INI file with one section per concern.

#ifndef FLLAB_HARNESS_CONFIG_H_
#define FLLAB_HARNESS_CONFIG_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fllab/adversary/dp.h"
#include "fllab/data/dataset.h"
#include "fllab/fl/fl.h"
#include "fllab/mi/mine.h"

namespace fllab {

struct DataSection {
  std::string kind = "mnist";  // mnist, cifar10 or synthetic
  std::string path;            // mnist: directory (empty = bundled); cifar10: batch files
  int64_t train_size = 2000;   // pool drawn from the loaded set
  int64_t test_size = 0;       // held-out samples; 0 = all remaining
  int synthetic_dim = 20;
  int64_t synthetic_samples = 4000;
  int synthetic_classes = 10;
  double synthetic_separation = 1.5;
  double entropy_bits = 0.0;   // per-sample entropy; 0 = dataset default

  bool operator==(const DataSection&) const = default;
};

struct MiSection {
  std::string mode = "per_round";   // per_round or accumulative
  int samples = 256;                // K
  MineConfig mine;
  int repetitions = 3;              // estimator seeds
  int64_t projection_dim = 1;       // 0 = raw vectors
  std::string projection = "random";  // random or pca
  std::string encoding = "gradient_sketch";
  int64_t local_size = 64;          // |D_i| for accumulative runs
  int train_rounds = 0;             // rounds applied before sampling
  int measure_rounds = 1;           // consecutive rounds estimated and averaged

  bool operator==(const MiSection&) const = default;
};

struct BoundsSection {
  double c_tilde = 1.0;
  double eigen_threshold = 1e-8;
  double sigma = 0.0;         // > 0 enables Case 2
  int gradient_samples = 256;
  int64_t d_star = 0;         // 0 = estimate from gradients
  double c0 = -1.0;           // < 0 = estimate from gradients

  bool operator==(const BoundsSection&) const = default;
};

struct SweepSection {
  std::vector<int> num_users;
  std::vector<int> batch_sizes;
  std::vector<double> epsilons;
  std::vector<int> rounds;

  bool operator==(const SweepSection&) const = default;
};

struct AttackSection {
  int iterations = 1000;
  double learning_rate = 1.0;
  int seeds = 5;
  int64_t batch = 1;
  bool dump_images = true;

  bool operator==(const AttackSection&) const = default;
};

struct ExperimentConfig {
  std::string id = "experiment";
  uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = "out";
  DataSection data;
  std::string model = "linear";
  FlConfig fl;
  double alpha = std::numeric_limits<double>::infinity();  // Dirichlet; inf = IID
  std::optional<DpParams> dp;
  MiSection mi;
  BoundsSection bounds;
  SweepSection sweep;
  AttackSection attack;

  // Cross-field checks; throws ConfigError naming the field.
  void Validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);
std::string SerializeConfig(const ExperimentConfig& config);

// Loaded training pool and held-out test set.
struct ExperimentData {
  Dataset train;
  Dataset test;
};

ExperimentData LoadExperimentData(const ExperimentConfig& config);

}  // namespace fllab

#endif  // FLLAB_HARNESS_CONFIG_H_
