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

// Gradient inversion (deep leakage from gradients) against single-layer
// models, PSNR scoring, and image export.

#ifndef FLLAB_ADVERSARY_DLG_H_
#define FLLAB_ADVERSARY_DLG_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fllab/data/dataset.h"
#include "fllab/model/model.h"
#include "fllab/nn/tensor.h"
#include "fllab/util/rng.h"

namespace fllab {

struct PsnrValue {
  double db = 0.0;
  bool exact = false;  // MSE was zero; db holds the cap
};

inline constexpr double kPsnrCapDb = 100.0;

// 10 log10(1 / MSE) for pixel values in [0, 1].
PsnrValue Psnr(std::span<const double> original, std::span<const double> reconstructed);

struct DlgConfig {
  int iterations = 1000;
  double learning_rate = 1.0;
  int max_restarts = 3;
  double tolerance = 1e-20;  // stop once the matching loss falls below this
  void Validate() const;
};

struct ReconstructionResult {
  Tensor images;                   // [batch, ...input_shape]
  std::vector<double> soft_labels;  // [batch, classes], probabilities
  std::vector<PsnrValue> psnr;     // filled by ScoreReconstruction
  std::vector<int> matched;        // matched[i] = true image index for reconstruction i
  int iterations = 0;
  int restarts = 0;
  double loss = 0.0;
  std::vector<double> loss_trace;  // loss of every accepted iterate
};

// Gradient-matching objective for a linear or slp model at fixed parameters.
// `x` is [batch, input] and `label_logits` is [batch, classes]. Writes the
// gradients when the pointers are non-null.
double DlgObjective(const Model& model, std::span<const double> observed,
                    std::span<const double> x, std::span<const double> label_logits,
                    int64_t batch, std::vector<double>* dx, std::vector<double>* dlabels);

// Reconstructs `batch` inputs whose gradient matches `observed`.
ReconstructionResult DlgAttack(const Model& model, std::span<const double> observed, int64_t batch,
                               const DlgConfig& config, Rng& rng);

// Starts from the given dummy inputs and label logits instead of random ones.
ReconstructionResult DlgAttackFrom(const Model& model, std::span<const double> observed,
                                   int64_t batch, std::vector<double> x,
                                   std::vector<double> label_logits, const DlgConfig& config);

// Pairs reconstructions with originals greedily by best PSNR and fills psnr
// and matched.
void ScoreReconstruction(const Tensor& originals, ReconstructionResult* result);

double MeanPsnr(const ReconstructionResult& result);

// One attack trial: N users each compute a FedSGD gradient on `batch` images,
// the server sees the mean, and the attacker reconstructs user 0's batch.
struct DlgTrial {
  int num_users = 1;
  int64_t batch = 1;
  uint64_t seed = 0;
};

ReconstructionResult RunDlgTrial(const Model& model, const Dataset& data, const DlgTrial& trial,
                                 const DlgConfig& config, Tensor* originals = nullptr);

// Binary PGM (1 channel) or PPM (3 channels) of one [c, h, w] image, 8 bits.
void WritePnm(const std::string& path, std::span<const double> image, const Shape& shape);

// Raw little-endian doubles.
void WriteRawF64(const std::string& path, std::span<const double> values);

}  // namespace fllab

#endif  // FLLAB_ADVERSARY_DLG_H_
