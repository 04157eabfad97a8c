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

// Sparse updates that secure aggregation cannot hide.

#ifndef FLLAB_ADVERSARY_COUNTEREXAMPLE_H_
#define FLLAB_ADVERSARY_COUNTEREXAMPLE_H_

#include <array>
#include <cstdint>
#include <vector>

namespace fllab {

struct CounterexampleConfig {
  int64_t support = 8;  // users 1..3 update coordinates [0, support)
  int64_t dim = 10;
  int trials = 1000;
  uint64_t seed = 0;
};

struct CounterexampleReport {
  int64_t distinguishing_coordinate = 0;
  int trials = 0;
  double accuracy = 0.0;          // x4 outside the span of the others
  double control_accuracy = 0.0;  // both candidates inside the span
  // table[truth][decision], 0 = x4, 1 = x4'.
  std::array<std::array<int, 2>, 2> table{};
  std::array<std::array<int, 2>, 2> control_table{};
};

CounterexampleReport SparsityCounterexample(const CounterexampleConfig& config = {});

}  // namespace fllab

#endif  // FLLAB_ADVERSARY_COUNTEREXAMPLE_H_
