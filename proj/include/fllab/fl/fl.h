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

#ifndef FLLAB_FL_FL_H_
#define FLLAB_FL_FL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fllab/adversary/dp.h"
#include "fllab/data/dataset.h"
#include "fllab/model/model.h"
#include "fllab/secagg/secure_agg.h"
#include "fllab/util/rng.h"

namespace fllab {

enum class Protocol { kFedSgd, kFedAvg, kFedProx };

Protocol ParseProtocol(const std::string& tag);
std::string ProtocolName(Protocol p);

struct FlConfig {
  int num_users = 10;          // N
  int clients_per_round = 0;   // K; 0 means all N
  int batch_size = 32;         // B
  int local_epochs = 1;        // E
  int rounds = 30;             // T
  double learning_rate = 0.5;  // eta
  Protocol protocol = Protocol::kFedSgd;
  double prox_mu = 0.01;
  double dropout_prob = 0.0;
  bool secure_aggregation = true;
  double quant_scale = 65536.0;
  std::optional<DpParams> dp;
  uint64_t seed = 0;
  int jobs = 1;

  int participants() const { return clients_per_round == 0 ? num_users : clients_per_round; }
  // Throws ConfigError naming the offending field.
  void Validate() const;

  bool operator==(const FlConfig&) const = default;
};

struct ModelUpdate {
  int user_id = 0;
  int round = 0;
  std::vector<double> values;
};

// x = mean gradient over a batch of B local samples drawn without replacement.
ModelUpdate LocalUpdateFedSgd(const Model& model, const Dataset& data,
                              std::span<const int64_t> local, int batch_size, Rng& rng);

// E epochs of minibatch SGD from the current parameters, reported as
// (theta - theta_local) / eta.
ModelUpdate LocalUpdateFedAvg(const Model& model, const Dataset& data,
                              std::span<const int64_t> local, int epochs, int batch_size,
                              double learning_rate, Rng& rng);

// FedAvg with the per-step loss plus (mu / 2) ||theta_local - theta||^2.
ModelUpdate LocalUpdateFedProx(const Model& model, const Dataset& data,
                               std::span<const int64_t> local, int epochs, int batch_size,
                               double learning_rate, double mu, Rng& rng);

// Uniform K-subset of [0, N), sorted; a pure function of (round, seed).
std::vector<int> SampleClients(int num_users, int k, int round, uint64_t seed);

// theta - eta * mean(updates).
std::vector<double> ServerStep(std::span<const double> theta, std::span<const ModelUpdate> updates,
                               double learning_rate);

struct RoundLog {
  int round = 0;
  int repetition = 0;
  std::vector<double> params_before;
  std::vector<double> params_after;
  std::vector<int> participants;  // sampled this round
  std::vector<int> survivors;     // participants that did not drop out
  std::vector<ModelUpdate> updates;  // one per survivor
  std::vector<double> aggregate;     // decoded mean of survivors' updates
  double accuracy = -1.0;            // -1 when not evaluated
  int64_t clipped = 0;               // quantization clips
};

// Holds the global model and runs rounds against it. Every random draw in a
// round is keyed by (seed, round, user, repetition), so a round can be
// replayed from the same global model with fresh local randomness.
class FlSimulator {
 public:
  FlSimulator(FlConfig config, const Dataset& data, Partition partition, const Model& initial);

  const FlConfig& config() const { return config_; }
  const Model& model() const { return model_; }
  const Partition& partition() const { return partition_; }
  const Dataset& data() const { return data_; }
  int round() const { return round_; }

  // One round from the current global model. Repetition 0 is the round that
  // training applies. Does not change the simulator.
  RoundLog RunRound(int repetition) const;

  // Makes the log's params_after the new global model.
  void Apply(const RoundLog& log);

 private:
  FlConfig config_;
  const Dataset& data_;
  Partition partition_;
  Model model_;
  PairwiseSeedTable seeds_;
  int round_ = 0;
};

// Runs config.rounds rounds. Accuracy is measured on `test` when given,
// otherwise on the training data.
std::vector<RoundLog> Train(const FlConfig& config, const Dataset& data, const Partition& partition,
                            const Model& initial, const Dataset* test = nullptr,
                            Model* final_model = nullptr);

}  // namespace fllab

#endif  // FLLAB_FL_FL_H_
