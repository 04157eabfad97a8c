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

#include "fllab/util/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "fllab/util/error.h"

namespace fllab {

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SampleStdDev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::pair<double, double> StudentCi95(std::span<const double> v) {
  if (v.size() < 2) {
    throw InvalidArgument("confidence interval needs at least 2 repetitions");
  }
  const double n = static_cast<double>(v.size());
  boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.975);
  const double half = t * SampleStdDev(v) / std::sqrt(n);
  const double m = Mean(v);
  return {m - half, m + half};
}

namespace {

std::vector<double> Ranks(std::span<const double> v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = Mean(a), mb = Mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double SpearmanRho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidArgument("spearman needs two equal-length series of size >= 2");
  }
  const auto ra = Ranks(a);
  const auto rb = Ranks(b);
  return Pearson(ra, rb);
}

std::pair<double, double> LinearFit(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("linear fit needs two equal-length series of size >= 2");
  }
  const double mx = Mean(x), my = Mean(y);
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw NumericalError("linear fit: x has zero variance");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::pair<double, double> OriginFit(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw InvalidArgument("origin fit needs two equal-length non-empty series");
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  if (sxx == 0.0) throw NumericalError("origin fit: x is all zero");
  const double b = sxy / sxx;
  double ss_res = 0;
  for (size_t i = 0; i < x.size(); ++i) ss_res += (y[i] - b * x[i]) * (y[i] - b * x[i]);
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 0.0;
  return {b, r2};
}

double ChiSquarePValue(double statistic, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace fllab
