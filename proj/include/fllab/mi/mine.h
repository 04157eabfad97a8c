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

#ifndef FLLAB_MI_MINE_H_
#define FLLAB_MI_MINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fllab/util/linalg.h"

namespace fllab {

// K paired samples: row k of x and row k of z form one pair.
struct SampleSet {
  RowMatrix x;
  RowMatrix z;
  int64_t size() const { return x.rows(); }
};

// Binary container: little-endian u64 K, d_x, d_z, then x and z as row-major
// f64 arrays.
void WriteSampleSet(const SampleSet& s, const std::string& path);
SampleSet ReadSampleSet(const std::string& path);

struct MineConfig {
  std::vector<int> hidden = {100, 100};
  int iterations = 1000;
  double learning_rate = 1e-3;  // Adam
  double ema_decay = 0.99;      // moving average of E[e^T] in the gradient
  double weight_decay = 1e-2;   // L2 penalty on critic weights
  int eval_shuffles = 10;       // marginal shuffles averaged in the final value
  uint64_t seed = 0;

  void Validate() const;
  bool operator==(const MineConfig&) const = default;
};

struct MineResult {
  double nats = 0.0;
  double bits = 0.0;
  std::vector<double> trace_bits;  // training objective every 100 iterations
};

// Donsker-Varadhan estimate of I(X; Z) with a ReLU critic T(x, z) trained by
// full-batch Adam on all K pairs. Columns are standardized first. Returns the
// final critic's objective on the joint pairs against shuffled marginals.
MineResult MineEstimate(const SampleSet& samples, const MineConfig& config);

}  // namespace fllab

#endif  // FLLAB_MI_MINE_H_
