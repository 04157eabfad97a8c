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

#ifndef FLLAB_UTIL_RNG_H_
#define FLLAB_UTIL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fllab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent seeds from a base seed and
// a list of tags (round, user, repetition, ...), so every stream in a run is a
// pure function of the configured seed.
uint64_t MixSeed(uint64_t x);
uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags);

inline Rng MakeRng(uint64_t base, std::initializer_list<uint64_t> tags) {
  return Rng(DeriveSeed(base, tags));
}

double StandardNormal(Rng& rng);
double UniformDouble(Rng& rng, double lo, double hi);

// Fills `out` with i.i.d. N(0, 1) draws.
void FillStandardNormal(Rng& rng, std::vector<double>& out);

}  // namespace fllab

#endif  // FLLAB_UTIL_RNG_H_
