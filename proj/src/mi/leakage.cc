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

#include "fllab/mi/leakage.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>
#include <fmt/format.h>

#include "fllab/util/error.h"
#include "fllab/util/parallel.h"
#include "fllab/util/stats.h"

namespace fllab {
namespace {

bool HasNoVariance(const RowMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if ((a.col(j).array() != a(0, j)).any()) return false;
  }
  return true;
}

Eigen::RowVectorXd ToRow(std::span<const double> v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::MatrixXd ProjectionMatrix(int64_t d, int64_t p, uint64_t seed, bool orthogonal) {
  if (p < 1 || p > d) throw InvalidArgument(fmt::format("projection dim {} not in [1, {}]", p, d));
  Rng rng = MakeRng(seed, {0x9e0, static_cast<uint64_t>(d), static_cast<uint64_t>(p)});
  Eigen::MatrixXd m(d, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = scale * StandardNormal(rng);
  }
  if (orthogonal) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, p);
    m = q;
  }
  return m;
}

RowMatrix RandomProject(const RowMatrix& vectors, int64_t target_dim, uint64_t seed,
                        bool orthogonal) {
  return vectors * ProjectionMatrix(vectors.cols(), target_dim, seed, orthogonal);
}

Eigen::VectorXd TopPrincipalDirection(const RowMatrix& samples) {
  CovarianceSpectrum s = CovarianceEigen(samples, true);
  if (s.eigenvalues.size() == 0 || s.eigenvalues[0] <= 0.0) {
    throw NumericalError("samples have no variance, principal direction undefined");
  }
  Eigen::VectorXd u = s.directions.col(0);
  // Fix the sign so the result does not depend on the eigensolver.
  Eigen::Index arg;
  u.cwiseAbs().maxCoeff(&arg);
  if (u[arg] < 0) u = -u;
  return u;
}

SampleSet CollectRoundSamples(const FlSimulator& sim, int target_user, int k,
                              int64_t projection_dim, uint64_t projection_seed,
                              RoundLog* training_round) {
  if (k < 1) throw InvalidArgument("need at least one sample");
  const auto& parts = sim.partition().user_indices;
  if (target_user < 0 || target_user >= static_cast<int>(parts.size())) {
    throw InvalidArgument(fmt::format("target user {} does not exist", target_user));
  }
  const int64_t d = sim.model().num_params();
  const int64_t width = projection_dim > 0 ? projection_dim : d;
  Eigen::MatrixXd proj;
  if (projection_dim > 0) proj = ProjectionMatrix(d, projection_dim, projection_seed);
  SampleSet out{RowMatrix(k, width), RowMatrix(k, width)};
  for (int i = 0; i < k; ++i) {
    RoundLog log = sim.RunRound(k - 1 - i);
    auto it = std::find_if(log.updates.begin(), log.updates.end(),
                           [&](const ModelUpdate& u) { return u.user_id == target_user; });
    if (it == log.updates.end()) {
      throw InvalidArgument(fmt::format("target user {} did not take part in round {}", target_user,
                                        log.round));
    }
    Eigen::RowVectorXd x = ToRow(it->values);
    Eigen::RowVectorXd z = ToRow(log.aggregate) * static_cast<double>(log.survivors.size());
    if (projection_dim > 0) {
      out.x.row(i) = x * proj;
      out.z.row(i) = z * proj;
    } else {
      out.x.row(i) = x;
      out.z.row(i) = z;
    }
    if (i == k - 1 && training_round != nullptr) *training_round = std::move(log);
  }
  return out;
}

double LeakageDenominatorBits(Protocol protocol, int64_t batch_size, int64_t local_size,
                              double entropy_bits_per_sample) {
  const int64_t n = protocol == Protocol::kFedSgd ? batch_size : local_size;
  if (n < 1 || !(entropy_bits_per_sample > 0)) {
    throw InvalidArgument("normalization needs a positive sample count and entropy");
  }
  return static_cast<double>(n) * entropy_bits_per_sample;
}

LeakageEstimate EstimateRoundLeakage(const SampleSet& samples, const MineConfig& config,
                                     double denominator_bits, int repetitions, int jobs) {
  if (repetitions < 2) throw InvalidArgument("a confidence interval needs >= 2 estimator seeds");
  if (!(denominator_bits > 0)) throw InvalidArgument("denominator must be positive");
  LeakageEstimate e;
  e.samples = samples.size();
  e.denominator_bits = denominator_bits;
  e.per_seed_bits.assign(static_cast<size_t>(repetitions), 0.0);
  if (!HasNoVariance(samples.x) && !HasNoVariance(samples.z)) {
    ParallelFor(repetitions, jobs, [&](int64_t r) {
      MineConfig c = config;
      c.seed = config.seed + static_cast<uint64_t>(r);
      e.per_seed_bits[static_cast<size_t>(r)] = MineEstimate(samples, c).bits;
    });
  }
  e.mi_bits_raw = Mean(e.per_seed_bits);
  std::tie(e.ci_low, e.ci_high) = StudentCi95(e.per_seed_bits);
  e.mi_bits = std::max(0.0, e.mi_bits_raw);
  e.normalized = e.mi_bits / denominator_bits;
  return e;
}

DatasetEncoding ParseEncoding(const std::string& tag) {
  if (tag == "pixels") return DatasetEncoding::kPixels;
  if (tag == "gradient_sketch") return DatasetEncoding::kGradientSketch;
  throw ConfigError(fmt::format("unknown dataset encoding '{}' (expected pixels or gradient_sketch)", tag));
}

SampleSet CollectAccumulativeSamples(const AccumulativeSetup& setup, const Dataset& pool, int jobs) {
  const FlConfig& fl = setup.fl;
  fl.Validate();
  const int64_t d = setup.initial.num_params();
  const int t_rounds = fl.rounds;
  if (t_rounds < 1) throw InvalidArgument("accumulative leakage needs T >= 1");
  if (setup.k < 2) throw InvalidArgument("accumulative leakage needs K >= 2 re-runs");
  const int64_t need = fl.num_users * setup.local_size;
  if (setup.local_size < 1 || need > pool.size()) {
    throw InvalidArgument(fmt::format("pool of {} samples cannot supply {} users x {} samples",
                                      pool.size(), fl.num_users, setup.local_size));
  }
  const int64_t p = setup.projection_dim;
  if (p == 0 && d * t_rounds > setup.max_dim) {
    throw InvalidArgument(fmt::format(
        "concatenated aggregates have {} = d * T coordinates, above the cap of {}; set a "
        "projection dimension",
        d * t_rounds, setup.max_dim));
  }
  const int64_t per_round = p > 0 ? p : d;
  Eigen::MatrixXd proj;
  if (p > 0) proj = ProjectionMatrix(d, p, setup.projection_seed);

  const int64_t images = std::min<int64_t>(64, setup.local_size);
  const int64_t pixel_dim = images * pool.sample_size();
  int64_t x_dim = 0;
  Eigen::MatrixXd pixel_proj;
  if (setup.encoding == DatasetEncoding::kGradientSketch) {
    x_dim = per_round;
  } else {
    x_dim = p > 0 ? p : pixel_dim;
    if (p > 0) pixel_proj = ProjectionMatrix(pixel_dim, p, setup.projection_seed + 1);
  }

  SampleSet out{RowMatrix(setup.k, x_dim), RowMatrix(setup.k, per_round * t_rounds)};
  std::vector<int64_t> all(static_cast<size_t>(pool.size()));
  std::iota(all.begin(), all.end(), 0);
  ParallelFor(setup.k, jobs, [&](int64_t run) {
    Rng rng = MakeRng(fl.seed, {0xacc, static_cast<uint64_t>(run)});
    const auto drawn = SampleBatch(all, need, rng);
    const Dataset local = pool.Subset(drawn);
    Partition part;
    for (int u = 0; u < fl.num_users; ++u) {
      auto& idx = part.user_indices.emplace_back(static_cast<size_t>(setup.local_size));
      std::iota(idx.begin(), idx.end(), u * setup.local_size);
    }
    FlConfig c = fl;
    c.seed = DeriveSeed(fl.seed, {0xacc, static_cast<uint64_t>(run)});
    c.jobs = 1;
    FlSimulator sim(c, local, part, setup.initial);

    const auto& own = part.user_indices[0];
    if (setup.encoding == DatasetEncoding::kGradientSketch) {
      Batch b = Gather(local, own);
      std::vector<double> g;
      setup.initial.LossAndGradient(b.images, b.labels, &g);
      Eigen::RowVectorXd sum = ToRow(g) * static_cast<double>(own.size());
      out.x.row(run) = p > 0 ? Eigen::RowVectorXd(sum * proj) : sum;
    } else {
      Eigen::RowVectorXd px(pixel_dim);
      for (int64_t i = 0; i < images; ++i) {
        auto s = local.sample(own[static_cast<size_t>(i)]);
        px.segment(i * pool.sample_size(), pool.sample_size()) = ToRow(s);
      }
      out.x.row(run) = p > 0 ? Eigen::RowVectorXd(px * pixel_proj) : px;
    }
    for (int t = 0; t < t_rounds; ++t) {
      RoundLog log = sim.RunRound(0);
      const Eigen::RowVectorXd agg = ToRow(log.aggregate);
      out.z.row(run).segment(t * per_round, per_round) =
          p > 0 ? Eigen::RowVectorXd(agg * proj) : agg;
      sim.Apply(log);
    }
  });
  return out;
}

LeakageEstimate EstimateAccumulative(const AccumulativeSetup& setup, const Dataset& pool,
                                     const MineConfig& config, int repetitions, int jobs) {
  const SampleSet s = CollectAccumulativeSamples(setup, pool, jobs);
  LeakageEstimate e = EstimateRoundLeakage(
      s, config, LeakageDenominatorBits(Protocol::kFedAvg, 0, setup.local_size, pool.entropy_bits),
      repetitions, jobs);
  e.round = setup.fl.rounds;
  return e;
}

}  // namespace fllab
