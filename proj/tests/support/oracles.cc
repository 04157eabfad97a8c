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

#include "oracles.h"

#include <cmath>

#include "fllab/util/rng.h"

namespace fllab::test_support {

SampleSet GaussianPairs(int64_t k, int dim, double rho, uint64_t seed) {
  Rng rng(seed);
  SampleSet s{RowMatrix(k, dim), RowMatrix(k, dim)};
  const double c = std::sqrt(1.0 - rho * rho);
  for (int64_t i = 0; i < k; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double a = StandardNormal(rng);
      s.x(i, j) = a;
      s.z(i, j) = rho * a + c * StandardNormal(rng);
    }
  }
  return s;
}

double GaussianMiBits(int dim, double rho) { return -0.5 * dim * std::log2(1.0 - rho * rho); }

}  // namespace fllab::test_support
