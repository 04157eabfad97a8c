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

#include "fllab/adversary/dp.h"

#include <cmath>

#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {

double DpSigma(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw InvalidArgument(fmt::format("epsilon must be > 0, got {}", epsilon));
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument(fmt::format("delta must lie in (0, 1), got {}", delta));
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

void DpParams::Validate() const {
  if (!(clip_norm > 0.0)) throw ConfigError(fmt::format("dp clip norm must be > 0, got {}", clip_norm));
  if (!(epsilon > 0.0)) throw ConfigError(fmt::format("dp epsilon must be > 0, got {}", epsilon));
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError(fmt::format("dp delta must lie in (0, 1), got {}", delta));
}

std::vector<double> ClipToNorm(std::span<const double> v, double clip_norm) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
  std::vector<double> out(v.begin(), v.end());
  if (factor != 1.0) {
    for (double& x : out) x *= factor;
  }
  return out;
}

std::vector<double> ClipAndNoise(std::span<const double> v, double clip_norm, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise level must be >= 0");
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("cannot privatize a non-finite aggregate");
  }
  std::vector<double> out = ClipToNorm(v, clip_norm);
  if (sigma > 0.0) {
    for (double& x : out) x += sigma * StandardNormal(rng);
  }
  return out;
}

std::vector<double> ClipAndNoise(std::span<const double> v, const DpParams& params, Rng& rng) {
  return ClipAndNoise(v, params.clip_norm, params.sigma(), rng);
}

}  // namespace fllab
