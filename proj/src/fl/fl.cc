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

#include "fllab/fl/fl.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "fllab/util/error.h"
#include "fllab/util/parallel.h"

namespace fllab {
namespace {

constexpr uint64_t kLocalTag = 0xf1;
constexpr uint64_t kDropTag = 0xd0;
constexpr uint64_t kClientTag = 0xc5;
constexpr uint64_t kDpTag = 0xdd;

void RequireLocal(std::span<const int64_t> local) {
  if (local.empty()) throw InvalidArgument("user has no local data");
}

double CheckedLoss(const Model& m, const Batch& b, std::vector<double>* g) {
  const double loss = m.LossAndGradient(b.images, b.labels, g);
  if (!std::isfinite(loss)) throw NumericalError("local training produced a non-finite loss");
  return loss;
}

ModelUpdate LocalSgd(const Model& model, const Dataset& data, std::span<const int64_t> local,
                     int epochs, int batch_size, double eta, double mu, Rng& rng) {
  RequireLocal(local);
  if (epochs < 1) throw InvalidArgument("local epochs must be >= 1");
  if (batch_size < 1 || batch_size > static_cast<int64_t>(local.size())) {
    throw InvalidArgument(fmt::format("batch size {} not in [1, {}]", batch_size, local.size()));
  }
  if (!(eta > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (mu < 0.0) throw InvalidArgument(fmt::format("proximal mu must be >= 0, got {}", mu));
  const std::vector<double> anchor(model.params().begin(), model.params().end());
  Model local_model = model;
  std::vector<int64_t> order(local.begin(), local.end());
  std::vector<double> g;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(batch_size));
      Batch b = Gather(data, std::span(order).subspan(start, stop - start));
      CheckedLoss(local_model, b, &g);
      auto p = local_model.mutable_params();
      if (mu > 0.0) {
        for (size_t j = 0; j < g.size(); ++j) g[j] += mu * (p[j] - anchor[j]);
      }
      for (size_t j = 0; j < g.size(); ++j) p[j] -= eta * g[j];
    }
  }
  ModelUpdate u;
  u.values.resize(anchor.size());
  auto p = local_model.params();
  for (size_t j = 0; j < anchor.size(); ++j) u.values[j] = (anchor[j] - p[j]) / eta;
  return u;
}

}  // namespace

Protocol ParseProtocol(const std::string& tag) {
  if (tag == "fedsgd") return Protocol::kFedSgd;
  if (tag == "fedavg") return Protocol::kFedAvg;
  if (tag == "fedprox") return Protocol::kFedProx;
  throw ConfigError(fmt::format("unknown protocol '{}' (expected fedsgd, fedavg or fedprox)", tag));
}

std::string ProtocolName(Protocol p) {
  switch (p) {
    case Protocol::kFedSgd: return "fedsgd";
    case Protocol::kFedAvg: return "fedavg";
    case Protocol::kFedProx: return "fedprox";
  }
  return "unknown";
}

void FlConfig::Validate() const {
  if (num_users < 1) throw ConfigError(fmt::format("num_users must be >= 1, got {}", num_users));
  if (clients_per_round < 0 || clients_per_round > num_users) {
    throw ConfigError(fmt::format("clients_per_round must lie in [1, num_users={}], got {}",
                                  num_users, clients_per_round));
  }
  if (batch_size < 1) throw ConfigError(fmt::format("batch_size must be >= 1, got {}", batch_size));
  if (local_epochs < 1) throw ConfigError(fmt::format("local_epochs must be >= 1, got {}", local_epochs));
  if (rounds < 0) throw ConfigError(fmt::format("rounds must be >= 0, got {}", rounds));
  if (!(learning_rate > 0.0)) throw ConfigError(fmt::format("learning_rate must be > 0, got {}", learning_rate));
  if (prox_mu < 0.0) throw ConfigError(fmt::format("prox_mu must be >= 0, got {}", prox_mu));
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw ConfigError(fmt::format("dropout_prob must lie in [0, 1), got {}", dropout_prob));
  }
  if (secure_aggregation) QuantSpec::ForUsers(participants(), quant_scale).CheckNoWrap(participants());
  if (dp) dp->Validate();
  if (jobs < 1) throw ConfigError(fmt::format("jobs must be >= 1, got {}", jobs));
}

ModelUpdate LocalUpdateFedSgd(const Model& model, const Dataset& data,
                              std::span<const int64_t> local, int batch_size, Rng& rng) {
  RequireLocal(local);
  const auto idx = SampleBatch(local, batch_size, rng);
  ModelUpdate u;
  CheckedLoss(model, Gather(data, idx), &u.values);
  return u;
}

ModelUpdate LocalUpdateFedAvg(const Model& model, const Dataset& data,
                              std::span<const int64_t> local, int epochs, int batch_size,
                              double learning_rate, Rng& rng) {
  return LocalSgd(model, data, local, epochs, batch_size, learning_rate, 0.0, rng);
}

ModelUpdate LocalUpdateFedProx(const Model& model, const Dataset& data,
                               std::span<const int64_t> local, int epochs, int batch_size,
                               double learning_rate, double mu, Rng& rng) {
  if (mu < 0.0) throw InvalidArgument(fmt::format("proximal mu must be >= 0, got {}", mu));
  return LocalSgd(model, data, local, epochs, batch_size, learning_rate, mu, rng);
}

std::vector<int> SampleClients(int num_users, int k, int round, uint64_t seed) {
  if (k < 1 || k > num_users) {
    throw InvalidArgument(fmt::format("cannot sample {} of {} users", k, num_users));
  }
  std::vector<int64_t> all(static_cast<size_t>(num_users));
  std::iota(all.begin(), all.end(), 0);
  Rng rng = MakeRng(seed, {static_cast<uint64_t>(round), kClientTag});
  const auto picked = SampleBatch(all, k, rng);
  std::vector<int> out(picked.begin(), picked.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> ServerStep(std::span<const double> theta, std::span<const ModelUpdate> updates,
                               double learning_rate) {
  std::vector<double> next(theta.begin(), theta.end());
  if (updates.empty()) return next;
  const int round = updates.front().round;
  std::vector<double> mean(theta.size(), 0.0);
  for (const auto& u : updates) {
    if (u.round != round) throw InvalidArgument("server step mixes updates from different rounds");
    if (u.values.size() != theta.size()) {
      throw InvalidArgument(fmt::format("update of length {} for a model of length {}",
                                        u.values.size(), theta.size()));
    }
    for (size_t j = 0; j < mean.size(); ++j) mean[j] += u.values[j];
  }
  const double scale = learning_rate / static_cast<double>(updates.size());
  for (size_t j = 0; j < next.size(); ++j) next[j] -= scale * mean[j];
  return next;
}

FlSimulator::FlSimulator(FlConfig config, const Dataset& data, Partition partition,
                         const Model& initial)
    : config_(std::move(config)), data_(data), partition_(std::move(partition)), model_(initial) {
  config_.Validate();
  if (partition_.num_users() != config_.num_users) {
    throw ConfigError(fmt::format("partition has {} users, config has {}", partition_.num_users(),
                                  config_.num_users));
  }
  for (const auto& part : partition_.user_indices) {
    if (config_.protocol == Protocol::kFedSgd &&
        static_cast<int64_t>(part.size()) < config_.batch_size) {
      throw ConfigError(fmt::format("batch_size {} exceeds a local dataset of {} samples",
                                    config_.batch_size, part.size()));
    }
  }
  if (config_.secure_aggregation) seeds_ = PairwiseSeedTable::Generate(config_.num_users, config_.seed);
}

RoundLog FlSimulator::RunRound(int repetition) const {
  const FlConfig& c = config_;
  const auto t = static_cast<uint64_t>(round_);
  const auto rep = static_cast<uint64_t>(repetition);
  RoundLog log;
  log.round = round_;
  log.repetition = repetition;
  log.params_before.assign(model_.params().begin(), model_.params().end());
  log.participants = SampleClients(c.num_users, c.participants(), round_, c.seed);
  for (int u : log.participants) {
    Rng drop = MakeRng(c.seed, {t, static_cast<uint64_t>(u), rep, kDropTag});
    if (c.dropout_prob == 0.0 || UniformDouble(drop, 0.0, 1.0) >= c.dropout_prob) {
      log.survivors.push_back(u);
    }
  }

  log.updates.resize(log.survivors.size());
  ParallelFor(static_cast<int64_t>(log.survivors.size()), c.jobs, [&](int64_t k) {
    const int u = log.survivors[static_cast<size_t>(k)];
    Rng rng = MakeRng(c.seed, {t, static_cast<uint64_t>(u), rep, kLocalTag});
    const auto& local = partition_.user_indices[static_cast<size_t>(u)];
    ModelUpdate upd;
    switch (c.protocol) {
      case Protocol::kFedSgd:
        upd = LocalUpdateFedSgd(model_, data_, local, c.batch_size, rng);
        break;
      case Protocol::kFedAvg:
        upd = LocalUpdateFedAvg(model_, data_, local, c.local_epochs,
                                std::min<int>(c.batch_size, static_cast<int>(local.size())),
                                c.learning_rate, rng);
        break;
      case Protocol::kFedProx:
        upd = LocalUpdateFedProx(model_, data_, local, c.local_epochs,
                                 std::min<int>(c.batch_size, static_cast<int>(local.size())),
                                 c.learning_rate, c.prox_mu, rng);
        break;
    }
    upd.user_id = u;
    upd.round = round_;
    log.updates[static_cast<size_t>(k)] = std::move(upd);
  });

  const size_t d = log.params_before.size();
  if (log.survivors.empty()) {
    log.aggregate.assign(d, 0.0);
  } else if (c.secure_aggregation) {
    const QuantSpec spec = QuantSpec::ForUsers(c.participants(), c.quant_scale);
    std::vector<MaskedUpdate> masked(log.updates.size());
    std::vector<int64_t> clipped(log.updates.size(), 0);
    ParallelFor(static_cast<int64_t>(log.updates.size()), c.jobs, [&](int64_t k) {
      const auto& upd = log.updates[static_cast<size_t>(k)];
      QuantizeResult q = Quantize(upd.values, spec);
      clipped[static_cast<size_t>(k)] = q.clipped;
      masked[static_cast<size_t>(k)] =
          Mask(q.q, upd.user_id, log.participants, static_cast<uint32_t>(round_), seeds_);
    });
    log.clipped = std::accumulate(clipped.begin(), clipped.end(), int64_t{0});
    log.aggregate = DecodeAggregate(masked, log.survivors, seeds_, spec).mean;
  } else {
    log.aggregate.assign(d, 0.0);
    for (const auto& u : log.updates) {
      for (size_t j = 0; j < d; ++j) log.aggregate[j] += u.values[j];
    }
    for (double& v : log.aggregate) v /= static_cast<double>(log.updates.size());
  }
  if (c.dp && !log.survivors.empty()) {
    Rng noise = MakeRng(c.seed, {t, rep, kDpTag});
    log.aggregate = ClipAndNoise(log.aggregate, *c.dp, noise);
  }

  log.params_after = log.params_before;
  if (!log.survivors.empty()) {
    for (size_t j = 0; j < d; ++j) log.params_after[j] -= c.learning_rate * log.aggregate[j];
  }
  return log;
}

void FlSimulator::Apply(const RoundLog& log) {
  if (log.round != round_) {
    throw InvalidArgument(fmt::format("log is for round {}, simulator is at round {}", log.round, round_));
  }
  model_.SetParams(log.params_after);
  ++round_;
}

std::vector<RoundLog> Train(const FlConfig& config, const Dataset& data, const Partition& partition,
                            const Model& initial, const Dataset* test, Model* final_model) {
  FlSimulator sim(config, data, partition, initial);
  std::vector<RoundLog> logs;
  for (int t = 0; t < config.rounds; ++t) {
    RoundLog log = sim.RunRound(0);
    sim.Apply(log);
    log.accuracy = Evaluate(sim.model(), test != nullptr ? *test : data);
    logs.push_back(std::move(log));
  }
  if (final_model != nullptr) *final_model = sim.model();
  return logs;
}

}  // namespace fllab
