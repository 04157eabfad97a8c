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

#include "fllab/adversary/counterexample.h"

#include <random>
#include <vector>

#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

// Users 1..3 are dense on [0, support) and zero elsewhere.
std::vector<double> SparseUpdate(int64_t dim, int64_t support, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(dim), 0.0);
  for (int64_t j = 0; j < support; ++j) v[static_cast<size_t>(j)] = StandardNormal(rng);
  return v;
}

}  // namespace

CounterexampleReport SparsityCounterexample(const CounterexampleConfig& config) {
  if (config.support < 1 || config.dim <= config.support) {
    throw InvalidArgument("counterexample needs 1 <= support < dim");
  }
  if (config.trials < 1) throw InvalidArgument("counterexample needs at least one trial");
  CounterexampleReport rep;
  rep.distinguishing_coordinate = config.support;
  rep.trials = config.trials;
  const auto k = static_cast<size_t>(config.support);
  Rng rng = MakeRng(config.seed, {0x5ae});
  std::bernoulli_distribution coin(0.5);
  int hits = 0, control_hits = 0;
  for (int t = 0; t < config.trials; ++t) {
    std::vector<double> sum(static_cast<size_t>(config.dim), 0.0);
    for (int u = 0; u < 3; ++u) {
      const auto x = SparseUpdate(config.dim, config.support, rng);
      for (size_t j = 0; j < sum.size(); ++j) sum[j] += x[j];
    }
    // x4 touches the coordinate nobody else does; x4' stays in the shared support.
    const int truth = coin(rng) ? 0 : 1;
    std::vector<double> agg = sum;
    const auto inside = SparseUpdate(config.dim, config.support, rng);
    for (size_t j = 0; j < agg.size(); ++j) agg[j] += inside[j];
    if (truth == 0) agg[k] += 1.0;
    const int decision = agg[k] != 0.0 ? 0 : 1;
    ++rep.table[static_cast<size_t>(truth)][static_cast<size_t>(decision)];
    hits += decision == truth;

    // Control: both candidates inside the span; the same detector sees nothing.
    const int control_truth = coin(rng) ? 0 : 1;
    std::vector<double> cagg = sum;
    const auto c4 = SparseUpdate(config.dim, config.support, rng);
    for (size_t j = 0; j < cagg.size(); ++j) cagg[j] += c4[j];
    const int control_decision = cagg[k] != 0.0 ? 0 : 1;
    ++rep.control_table[static_cast<size_t>(control_truth)][static_cast<size_t>(control_decision)];
    control_hits += control_decision == control_truth;
  }
  rep.accuracy = static_cast<double>(hits) / config.trials;
  rep.control_accuracy = static_cast<double>(control_hits) / config.trials;
  return rep;
}

}  // namespace fllab
