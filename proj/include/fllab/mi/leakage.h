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

#ifndef FLLAB_MI_LEAKAGE_H_
#define FLLAB_MI_LEAKAGE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fllab/data/dataset.h"
#include "fllab/fl/fl.h"
#include "fllab/mi/mine.h"
#include "fllab/model/model.h"
#include "fllab/util/linalg.h"

namespace fllab {

// d x p projection matrix with i.i.d. N(0, 1/p) entries, or with orthonormal
// columns (Q factor of the Gaussian draw) when `orthogonal` is set.
Eigen::MatrixXd ProjectionMatrix(int64_t d, int64_t p, uint64_t seed, bool orthogonal = false);

// Rows of `vectors` (K x d) mapped to K x p by ProjectionMatrix(d, p, seed).
RowMatrix RandomProject(const RowMatrix& vectors, int64_t target_dim, uint64_t seed,
                        bool orthogonal = false);

// Leading principal direction of the rows of `samples`, unit norm.
Eigen::VectorXd TopPrincipalDirection(const RowMatrix& samples);

// Collects K (x_i, sum of survivors' updates) pairs at the simulator's current
// global model. Pair k uses repetition K - 1 - k, so the last pair is the
// round training applies; it is returned in `training_round` when non-null.
// With projection_dim > 0 both sides are projected by one shared Gaussian
// matrix as they are collected.
SampleSet CollectRoundSamples(const FlSimulator& sim, int target_user, int k,
                              int64_t projection_dim, uint64_t projection_seed,
                              RoundLog* training_round = nullptr);

struct LeakageEstimate {
  double mi_bits = 0.0;       // mean over estimator seeds, clamped at 0
  double mi_bits_raw = 0.0;   // unclamped mean
  double ci_low = 0.0;
  double ci_high = 0.0;
  double denominator_bits = 0.0;
  double normalized = 0.0;    // mi_bits / denominator_bits
  int64_t samples = 0;
  int round = 0;
  std::vector<double> per_seed_bits;
};

// Entropy of the data behind one update: B images for FedSGD, the whole
// local dataset otherwise.
double LeakageDenominatorBits(Protocol protocol, int64_t batch_size, int64_t local_size,
                              double entropy_bits_per_sample);

// MINE over `repetitions` estimator seeds (config.seed, +1, ...), with a
// Student-t 95% CI across seeds. A side with no variance carries no
// information and yields 0 without training.
LeakageEstimate EstimateRoundLeakage(const SampleSet& samples, const MineConfig& config,
                                     double denominator_bits, int repetitions = 3, int jobs = 1);

enum class DatasetEncoding {
  kPixels,          // raw pixels of the first min(64, n) images, projected
  kGradientSketch,  // projected sum of per-sample gradients at theta(0)
};

DatasetEncoding ParseEncoding(const std::string& tag);

struct AccumulativeSetup {
  Model initial;              // theta(0), shared by every re-run
  FlConfig fl;                // rounds = T; num_users = N
  int64_t local_size = 64;    // |D_i|, drawn fresh for every re-run
  int k = 1024;               // re-runs
  DatasetEncoding encoding = DatasetEncoding::kGradientSketch;
  int64_t projection_dim = 1;  // per-round and encoding dimension; 0 = none
  uint64_t projection_seed = 77;
  int64_t max_dim = 1 << 22;  // guard on the concatenated aggregate length
};

// K independent T-round trainings, each on freshly drawn local datasets from
// `pool`. Pairs (encoding of D_0, concatenated per-round aggregates).
SampleSet CollectAccumulativeSamples(const AccumulativeSetup& setup, const Dataset& pool,
                                     int jobs = 1);

// Accumulative leakage over setup.fl.rounds rounds, normalized by the entropy
// of the local dataset.
LeakageEstimate EstimateAccumulative(const AccumulativeSetup& setup, const Dataset& pool,
                                     const MineConfig& config, int repetitions = 3, int jobs = 1);

}  // namespace fllab

#endif  // FLLAB_MI_LEAKAGE_H_
