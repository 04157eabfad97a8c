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

#ifndef FLLAB_ADVERSARY_DP_H_
#define FLLAB_ADVERSARY_DP_H_

#include <span>
#include <vector>

#include "fllab/util/rng.h"

namespace fllab {

// sqrt(2 ln(1.25 / delta)) / epsilon.
double DpSigma(double epsilon, double delta);

struct DpParams {
  double clip_norm = 1.0;  // C
  double epsilon = 10.0;
  double delta = 1.0 / 1200.0;

  void Validate() const;
  double sigma() const { return DpSigma(epsilon, delta); }
  bool operator==(const DpParams&) const = default;
};

// Scales v by min(1, C / ||v||).
std::vector<double> ClipToNorm(std::span<const double> v, double clip_norm);

// Clip, then add i.i.d. N(0, sigma^2) to every coordinate.
std::vector<double> ClipAndNoise(std::span<const double> v, const DpParams& params, Rng& rng);
// Same with an explicit noise level; sigma = 0 only clips.
std::vector<double> ClipAndNoise(std::span<const double> v, double clip_norm, double sigma, Rng& rng);

}  // namespace fllab

#endif  // FLLAB_ADVERSARY_DP_H_
