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

// Closed-form per-round and accumulated leakage bounds for FedSGD with secure
// aggregation, and estimators for their inputs.

#ifndef FLLAB_BOUNDS_BOUNDS_H_
#define FLLAB_BOUNDS_BOUNDS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fllab/util/linalg.h"

namespace fllab {

enum class LogBase { kNats, kBits };

// Case 1: whitened gradient coordinates independent, fourth-moment constant c0.
// Requires n >= 2.
double PerRoundCase1(int64_t n, int64_t batch, int64_t d_star, double c0,
                     LogBase base = LogBase::kBits);

// Constants for the log-concave case. h_g and logdet_sigma are in nats.
double Case2C1(double sigma);
double Case2C2(double h_g, double logdet_sigma);

// Case 2: some whitened sub-vector is sigma-log concave.
double PerRoundCase2(int64_t n, int64_t batch, int64_t d_star, double sigma, double h_g,
                     double logdet_sigma, LogBase base = LogBase::kBits);

// First-term constants (c1, c2) of a bound (d* c1 - c2) / ((n-1) B), in nats.
struct BoundCandidate {
  double c1 = 0.0;
  double c2 = 0.0;

  static BoundCandidate Case1(double c0) { return {c0, 0.0}; }
  static BoundCandidate Case2(double sigma, double h_g, double logdet_sigma);
};

// Log term plus the smallest first term among the candidates.
double SimplifiedBound(std::span<const BoundCandidate> candidates, int64_t n, int64_t batch,
                       int64_t d_star, LogBase base = LogBase::kBits);

double MultiRound(double per_round, int64_t rounds);

// Simplified bound where only `survivors` non-colluding users hide the target.
double DropoutCollusion(std::span<const BoundCandidate> candidates, int64_t survivors,
                        int64_t batch, int64_t d_star, LogBase base = LogBase::kBits);

// Expected number of rounds a user takes part in when k of n are drawn per round.
double ExpectedParticipation(int64_t rounds, int64_t k, int64_t n);

// Case-1 bound with k users per round over `rounds` rounds.
double UserSamplingBound(int64_t k, int64_t batch, int64_t d_star, double c0, int64_t rounds,
                         int64_t n, LogBase base = LogBase::kBits);

struct RankEstimate {
  int64_t rank = 0;
  bool degenerate = false;  // covariance is identically zero
  Eigen::VectorXd eigenvalues;
};

// Number of sample-covariance eigenvalues above threshold * lambda_max.
// `gradients` holds one sample per row.
RankEstimate EstimateRank(const RowMatrix& gradients, double threshold = 1e-8);

struct MomentConstants {
  int64_t d_star = 0;
  double c0 = 0.0;               // c_tilde * max whitened fourth moment
  double max_fourth_moment = 0.0;
  double h_g = 0.0;              // Gaussian entropy of the covariance on the kept subspace, nats
  double logdet_sigma = 0.0;     // regularized log-determinant on the same subspace
  std::vector<std::string> warnings;
};

MomentConstants EstimateConstants(const RowMatrix& gradients, double c_tilde = 1.0,
                                  double threshold = 1e-8);

// Relative entropy, in nats, of sqrt(sigma) * q against N(0, cov), where q has
// covariance `cov` and differential entropy q_entropy.
double Lemma1RelativeEntropy(double sigma, const Eigen::MatrixXd& cov, double q_entropy);

// Entropy of N(mu, cov) in nats.
double GaussianEntropy(const Eigen::MatrixXd& cov);

// Everything the bound sweep needs for one cell.
struct BoundSpec {
  int64_t n = 2;
  int64_t batch = 1;
  int64_t d_star = 1;
  int64_t rounds = 1;
  double sigma = 0.0;  // <= 0 disables Case 2
  double c0 = 1.0;
  double h_g = 0.0;
  double logdet_sigma = 0.0;
  int64_t survivors = 0;          // 0 means n
  int64_t clients_per_round = 0;  // 0 means n
  LogBase base = LogBase::kBits;

  void Validate() const;
};

struct BoundReport {
  double case1 = 0.0;
  double case2 = 0.0;  // NaN when Case 2 is disabled
  double per_round = 0.0;
  double participation = 0.0;
  double total = 0.0;
};

BoundReport EvaluateBound(const BoundSpec& spec);

}  // namespace fllab

#endif  // FLLAB_BOUNDS_BOUNDS_H_
