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

#ifndef FLLAB_MODEL_MODEL_H_
#define FLLAB_MODEL_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fllab/data/dataset.h"
#include "fllab/nn/tensor.h"

namespace fllab {

enum class Architecture { kLinear, kSlp, kMlp, kCnn };

Architecture ParseArchitecture(const std::string& tag);
std::string ArchitectureName(Architecture arch);

struct ModelSpec {
  Architecture arch = Architecture::kLinear;
  Shape input_shape;  // per-sample shape, e.g. {1, 28, 28}
  int num_classes = 10;
  std::vector<int64_t> hidden = {100, 100};  // mlp only

  static ModelSpec For(const std::string& tag, Shape input_shape, int num_classes);
  int64_t input_size() const { return NumElements(input_shape); }
};

struct LayoutEntry {
  std::string name;
  int64_t offset = 0;
  Shape shape;
  int64_t size() const { return NumElements(shape); }
};

struct FlatParams {
  std::vector<double> values;
  std::vector<LayoutEntry> layout;
};

enum class Init { kUniformFanIn, kZero };

// A model is its spec plus one flat parameter vector; layer tensors are
// slices of that vector as described by the layout.
class Model {
 public:
  static Model Build(const ModelSpec& spec, uint64_t seed, Init init = Init::kUniformFanIn);

  const ModelSpec& spec() const { return spec_; }
  int64_t num_params() const { return static_cast<int64_t>(params_.size()); }
  const std::vector<LayoutEntry>& layout() const { return layout_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  void SetParams(std::span<const double> values);

  FlatParams Flatten() const { return {params_, layout_}; }
  void Unflatten(const FlatParams& flat);
  Tensor Layer(const std::string& name) const;

  // Logits [n, classes] for images [n, ...input_shape].
  Tensor Logits(const Tensor& images) const;
  std::vector<int> Predict(const Tensor& images) const;

  // Mean cross-entropy over the batch; writes the gradient w.r.t. the flat
  // parameters when `grad` is non-null.
  double LossAndGradient(const Tensor& images, std::span<const int> labels,
                         std::vector<double>* grad) const;

  // Row b is the gradient of sample b's loss. Shape [n, d].
  Tensor PerExampleGradients(const Tensor& images, std::span<const int> labels) const;

 private:
  ModelSpec spec_;
  std::vector<LayoutEntry> layout_;
  std::vector<double> params_;
};

// Fraction of argmax-correct predictions.
double Evaluate(const Model& model, const Dataset& data);

}  // namespace fllab

#endif  // FLLAB_MODEL_MODEL_H_
