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

#ifndef FLLAB_UTIL_STATS_H_
#define FLLAB_UTIL_STATS_H_

#include <span>
#include <utility>

namespace fllab {

double Mean(std::span<const double> v);
// Unbiased (n - 1) sample standard deviation; 0 for fewer than two values.
double SampleStdDev(std::span<const double> v);

// Two-sided 95% Student-t confidence interval for the mean.
// Requires at least two values.
std::pair<double, double> StudentCi95(std::span<const double> v);

// Spearman rank correlation (average ranks for ties).
double SpearmanRho(std::span<const double> a, std::span<const double> b);

// Least-squares slope and intercept of y on x.
std::pair<double, double> LinearFit(std::span<const double> x,
                                    std::span<const double> y);

// Slope of the no-intercept fit y = b x and its uncentered R^2.
std::pair<double, double> OriginFit(std::span<const double> x,
                                    std::span<const double> y);

// Upper-tail probability of a chi-square statistic with `dof` degrees of
// freedom.
double ChiSquarePValue(double statistic, double dof);

}  // namespace fllab

#endif  // FLLAB_UTIL_STATS_H_
