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

#include "fllab/bounds/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double FromNats(double nats, LogBase base) {
  return base == LogBase::kBits ? nats / std::numbers::ln2 : nats;
}

// (d*/2) log(n / (n-1)) in the requested base, computed directly so that
// power-of-two ratios come out exact.
double LogTerm(int64_t n, int64_t d_star, LogBase base) {
  const double ratio = static_cast<double>(n) / static_cast<double>(n - 1);
  const double l = base == LogBase::kBits ? std::log2(ratio) : std::log(ratio);
  return 0.5 * static_cast<double>(d_star) * l;
}

void CheckCommon(int64_t n, int64_t batch, int64_t d_star, const char* who) {
  if (n < 2) {
    throw InvalidArgument(fmt::format(
        "{}: bound undefined for {} hiding user(s); at least 2 are required", who, n));
  }
  if (batch < 1) throw InvalidArgument(fmt::format("{}: batch size must be >= 1", who));
  if (d_star < 1) throw InvalidArgument(fmt::format("{}: d* must be >= 1", who));
}

double FirstTerm(const BoundCandidate& c, int64_t n, int64_t batch, int64_t d_star) {
  return (static_cast<double>(d_star) * c.c1 - c.c2) /
         (static_cast<double>(n - 1) * static_cast<double>(batch));
}

double CholeskyLogdet(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols()) {
    throw InvalidArgument("covariance must be square and non-empty");
  }
  if (!cov.isApprox(cov.transpose())) throw NumericalError("covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

double PerRoundCase1(int64_t n, int64_t batch, int64_t d_star, double c0, LogBase base) {
  CheckCommon(n, batch, d_star, "case 1");
  if (!(c0 >= 0) || !std::isfinite(c0)) throw InvalidArgument("case 1: c0 must be finite and >= 0");
  return FromNats(FirstTerm(BoundCandidate::Case1(c0), n, batch, d_star), base) +
         LogTerm(n, d_star, base);
}

double Case2C1(double sigma) {
  if (!(sigma > 0)) throw InvalidArgument(fmt::format("case 2: sigma must be > 0, got {}", sigma));
  return 2.0 * (1.0 + sigma + kLog2Pi - std::log(sigma));
}

double Case2C2(double h_g, double logdet_sigma) { return 4.0 * (h_g - 0.5 * logdet_sigma); }

BoundCandidate BoundCandidate::Case2(double sigma, double h_g, double logdet_sigma) {
  const double s4 = std::pow(sigma, 4);
  return {Case2C1(sigma) / s4, Case2C2(h_g, logdet_sigma) / s4};
}

double PerRoundCase2(int64_t n, int64_t batch, int64_t d_star, double sigma, double h_g,
                     double logdet_sigma, LogBase base) {
  CheckCommon(n, batch, d_star, "case 2");
  const BoundCandidate c = BoundCandidate::Case2(sigma, h_g, logdet_sigma);
  return FromNats(FirstTerm(c, n, batch, d_star), base) + LogTerm(n, d_star, base);
}

double SimplifiedBound(std::span<const BoundCandidate> candidates, int64_t n, int64_t batch,
                       int64_t d_star, LogBase base) {
  if (candidates.empty()) throw InvalidArgument("simplified bound needs at least one candidate");
  CheckCommon(n, batch, d_star, "simplified bound");
  double best = std::numeric_limits<double>::infinity();
  for (const BoundCandidate& c : candidates) best = std::min(best, FirstTerm(c, n, batch, d_star));
  return FromNats(best, base) + LogTerm(n, d_star, base);
}

double MultiRound(double per_round, int64_t rounds) {
  if (rounds < 0) throw InvalidArgument("number of rounds must be >= 0");
  return static_cast<double>(rounds) * per_round;
}

double DropoutCollusion(std::span<const BoundCandidate> candidates, int64_t survivors,
                        int64_t batch, int64_t d_star, LogBase base) {
  if (survivors < 2) {
    throw InvalidArgument(fmt::format(
        "dropout/collusion leaves {} non-colluding survivor(s); the target cannot be hidden",
        survivors));
  }
  return SimplifiedBound(candidates, survivors, batch, d_star, base);
}

double ExpectedParticipation(int64_t rounds, int64_t k, int64_t n) {
  if (rounds < 0) throw InvalidArgument("number of rounds must be >= 0");
  if (k < 2 || k > n) {
    throw InvalidArgument(fmt::format("users per round {} outside [2, {}]", k, n));
  }
  return static_cast<double>(rounds) * static_cast<double>(k) / static_cast<double>(n);
}

double UserSamplingBound(int64_t k, int64_t batch, int64_t d_star, double c0, int64_t rounds,
                         int64_t n, LogBase base) {
  const double ti = ExpectedParticipation(rounds, k, n);
  if (k == n) return MultiRound(PerRoundCase1(n, batch, d_star, c0, base), rounds);
  return ti * PerRoundCase1(k, batch, d_star, c0, base);
}

RankEstimate EstimateRank(const RowMatrix& gradients, double threshold) {
  if (gradients.rows() < 2) throw InvalidArgument("rank estimate needs at least 2 gradients");
  if (!gradients.allFinite()) throw NumericalError("gradient sample contains non-finite values");
  if (!(threshold > 0 && threshold < 1)) throw InvalidArgument("eigen threshold must be in (0, 1)");
  RankEstimate r;
  r.eigenvalues = CovarianceEigen(gradients, false).eigenvalues;
  const double top = r.eigenvalues.size() > 0 ? r.eigenvalues[0] : 0.0;
  if (top <= 0) {
    r.degenerate = true;
    return r;
  }
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    if (r.eigenvalues[i] > threshold * top) ++r.rank;
  }
  return r;
}

MomentConstants EstimateConstants(const RowMatrix& gradients, double c_tilde, double threshold) {
  if (gradients.rows() < 2) throw InvalidArgument("constant estimate needs at least 2 gradients");
  if (!gradients.allFinite()) throw NumericalError("gradient sample contains non-finite values");
  if (!(c_tilde > 0)) throw InvalidArgument("c_tilde must be > 0");
  MomentConstants out;
  const int64_t m = gradients.rows();
  if (m < 100) {
    out.warnings.push_back(
        fmt::format("only {} gradient samples; fourth-moment estimate is unstable below 100", m));
  }
  const CovarianceSpectrum s = CovarianceEigen(gradients, true);
  const double top = s.eigenvalues.size() > 0 ? s.eigenvalues[0] : 0.0;
  if (top <= 0) throw NumericalError("gradient covariance is zero; nothing to whiten");
  int64_t k = 0;
  while (k < s.eigenvalues.size() && s.eigenvalues[k] > threshold * top) ++k;
  out.d_star = k;
  if (k < gradients.cols()) {
    out.warnings.push_back(fmt::format(
        "covariance has rank {} < {}; whitening the {}-dim principal sub-vector", k,
        gradients.cols(), k));
  }

  const Eigen::RowVectorXd mean = gradients.colwise().mean();
  const Eigen::VectorXd lam = s.eigenvalues.head(k);
  Eigen::MatrixXd w = (gradients.rowwise() - mean) * s.directions.leftCols(k);
  w.array().rowwise() /= lam.cwiseSqrt().transpose().array();
  out.max_fourth_moment = w.array().pow(4).colwise().mean().maxCoeff();
  out.c0 = c_tilde * out.max_fourth_moment;

  const double ridge = threshold * top;
  out.logdet_sigma = (lam.array() + ridge).log().sum();
  out.h_g = 0.5 * static_cast<double>(k) * (1.0 + kLog2Pi) + 0.5 * out.logdet_sigma;
  return out;
}

double GaussianEntropy(const Eigen::MatrixXd& cov) {
  return 0.5 * static_cast<double>(cov.rows()) * (1.0 + kLog2Pi) + 0.5 * CholeskyLogdet(cov);
}

double Lemma1RelativeEntropy(double sigma, const Eigen::MatrixXd& cov, double q_entropy) {
  if (!(sigma > 0)) throw InvalidArgument("sigma must be > 0");
  const double logdet = CholeskyLogdet(cov);
  const double d = static_cast<double>(cov.rows());
  return -q_entropy - 0.5 * d * std::log(sigma) + 0.5 * d * kLog2Pi + 0.5 * logdet +
         0.5 * sigma * d;
}

void BoundSpec::Validate() const {
  if (n < 2) throw ConfigError(fmt::format("bound needs n >= 2, got {}", n));
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (d_star < 1) throw ConfigError("d* must be >= 1");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (!(c0 >= 0)) throw ConfigError("c0 must be >= 0");
  if (survivors != 0 && (survivors < 2 || survivors > n)) {
    throw ConfigError(fmt::format("survivors {} outside [2, {}]", survivors, n));
  }
  if (clients_per_round != 0 && (clients_per_round < 2 || clients_per_round > n)) {
    throw ConfigError(fmt::format("clients per round {} outside [2, {}]", clients_per_round, n));
  }
}

BoundReport EvaluateBound(const BoundSpec& spec) {
  spec.Validate();
  const int64_t k = spec.clients_per_round > 0 ? spec.clients_per_round : spec.n;
  // Users that actually hide the target in a round.
  const int64_t hiding = spec.survivors > 0 ? std::min(spec.survivors, k) : k;
  std::vector<BoundCandidate> cands = {BoundCandidate::Case1(spec.c0)};
  BoundReport r;
  r.case1 = PerRoundCase1(hiding, spec.batch, spec.d_star, spec.c0, spec.base);
  r.case2 = std::numeric_limits<double>::quiet_NaN();
  if (spec.sigma > 0) {
    r.case2 = PerRoundCase2(hiding, spec.batch, spec.d_star, spec.sigma, spec.h_g,
                            spec.logdet_sigma, spec.base);
    cands.push_back(BoundCandidate::Case2(spec.sigma, spec.h_g, spec.logdet_sigma));
  }
  r.per_round = DropoutCollusion(cands, hiding, spec.batch, spec.d_star, spec.base);
  r.participation = k == spec.n ? static_cast<double>(spec.rounds)
                                : ExpectedParticipation(spec.rounds, k, spec.n);
  r.total = r.participation * r.per_round;
  return r;
}

}  // namespace fllab
