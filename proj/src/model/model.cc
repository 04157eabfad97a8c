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

#include "fllab/model/model.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fllab/nn/grad_tape.h"
#include "fllab/nn/ops.h"
#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

constexpr Conv2dParams kCnnConv{2, 0};
constexpr int64_t kCnnKernel = 5;

struct LayerDef {
  std::string name;
  Shape shape;
  int64_t fan_in;
};

std::vector<LayerDef> LayersFor(const ModelSpec& spec) {
  const int64_t in = spec.input_size();
  const int64_t c = spec.num_classes;
  switch (spec.arch) {
    case Architecture::kLinear:
    case Architecture::kSlp:
      return {{"fc.weight", {in, c}, in}, {"fc.bias", {c}, in}};
    case Architecture::kMlp: {
      std::vector<LayerDef> out;
      int64_t prev = in;
      for (size_t i = 0; i < spec.hidden.size(); ++i) {
        const std::string p = fmt::format("fc{}", i + 1);
        out.push_back({p + ".weight", {prev, spec.hidden[i]}, prev});
        out.push_back({p + ".bias", {spec.hidden[i]}, prev});
        prev = spec.hidden[i];
      }
      out.push_back({"out.weight", {prev, c}, prev});
      out.push_back({"out.bias", {c}, prev});
      return out;
    }
    case Architecture::kCnn: {
      if (spec.input_shape.size() != 3) {
        throw InvalidArgument("cnn input shape must be {channels, height, width}");
      }
      const int64_t ch = spec.input_shape[0];
      const int64_t h1 = ConvOutputSize(spec.input_shape[1], kCnnKernel, kCnnConv.stride, 0);
      const int64_t w1 = ConvOutputSize(spec.input_shape[2], kCnnKernel, kCnnConv.stride, 0);
      const int64_t h2 = ConvOutputSize(h1, kCnnKernel, kCnnConv.stride, 0);
      const int64_t w2 = ConvOutputSize(w1, kCnnKernel, kCnnConv.stride, 0);
      const int64_t flat = 16 * h2 * w2;
      const int64_t k2 = kCnnKernel * kCnnKernel;
      return {{"conv1.weight", {8, ch, kCnnKernel, kCnnKernel}, ch * k2},
              {"conv1.bias", {8}, ch * k2},
              {"conv2.weight", {16, 8, kCnnKernel, kCnnKernel}, 8 * k2},
              {"conv2.bias", {16}, 8 * k2},
              {"fc.weight", {flat, c}, flat},
              {"fc.bias", {c}, flat}};
    }
  }
  throw InvalidArgument("unknown architecture");
}

void CheckInput(const ModelSpec& spec, const Tensor& images) {
  if (images.rank() < 1 || images.size() != images.dim(0) * spec.input_size()) {
    throw InvalidArgument(fmt::format("images of shape {} do not match model input {}",
                                      ShapeToString(images.shape()),
                                      ShapeToString(spec.input_shape)));
  }
}

}  // namespace

Architecture ParseArchitecture(const std::string& tag) {
  if (tag == "linear") return Architecture::kLinear;
  if (tag == "slp") return Architecture::kSlp;
  if (tag == "mlp") return Architecture::kMlp;
  if (tag == "cnn") return Architecture::kCnn;
  throw InvalidArgument(fmt::format("unknown model tag '{}' (expected linear, slp, mlp or cnn)", tag));
}

std::string ArchitectureName(Architecture arch) {
  switch (arch) {
    case Architecture::kLinear: return "linear";
    case Architecture::kSlp: return "slp";
    case Architecture::kMlp: return "mlp";
    case Architecture::kCnn: return "cnn";
  }
  return "unknown";
}

ModelSpec ModelSpec::For(const std::string& tag, Shape input_shape, int num_classes) {
  ModelSpec s;
  s.arch = ParseArchitecture(tag);
  s.input_shape = std::move(input_shape);
  s.num_classes = num_classes;
  return s;
}

Model Model::Build(const ModelSpec& spec, uint64_t seed, Init init) {
  if (spec.num_classes < 1 || spec.input_size() < 1) {
    throw InvalidArgument("model needs a positive input size and class count");
  }
  Model m;
  m.spec_ = spec;
  int64_t offset = 0;
  const auto defs = LayersFor(spec);
  for (const auto& def : defs) {
    m.layout_.push_back({def.name, offset, def.shape});
    offset += NumElements(def.shape);
  }
  m.params_.assign(static_cast<size_t>(offset), 0.0);
  if (init == Init::kUniformFanIn) {
    Rng rng = MakeRng(seed, {0x30de1});
    for (size_t i = 0; i < defs.size(); ++i) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(defs[i].fan_in));
      const auto& e = m.layout_[i];
      for (int64_t j = 0; j < e.size(); ++j) {
        m.params_[static_cast<size_t>(e.offset + j)] = UniformDouble(rng, -bound, bound);
      }
    }
  }
  return m;
}

void Model::SetParams(std::span<const double> values) {
  if (values.size() != params_.size()) {
    throw InvalidArgument(fmt::format("parameter vector has length {}, model expects {}",
                                      values.size(), params_.size()));
  }
  std::copy(values.begin(), values.end(), params_.begin());
}

void Model::Unflatten(const FlatParams& flat) {
  if (flat.layout.size() != layout_.size()) throw InvalidArgument("layout does not match model");
  for (size_t i = 0; i < layout_.size(); ++i) {
    if (flat.layout[i].name != layout_[i].name || flat.layout[i].offset != layout_[i].offset ||
        flat.layout[i].shape != layout_[i].shape) {
      throw InvalidArgument(fmt::format("layout entry {} does not match model", flat.layout[i].name));
    }
  }
  SetParams(flat.values);
}

Tensor Model::Layer(const std::string& name) const {
  for (const auto& e : layout_) {
    if (e.name == name) {
      auto first = params_.begin() + e.offset;
      return Tensor(e.shape, std::vector<double>(first, first + e.size()));
    }
  }
  throw InvalidArgument(fmt::format("no layer named {}", name));
}

namespace {

// Builds the forward graph on `tape`; returns the logits node and the
// parameter nodes in layout order.
GradTape::NodeId Forward(const Model& m, const Tensor& images, GradTape& tape,
                         std::vector<GradTape::NodeId>& param_nodes) {
  for (const auto& e : m.layout()) param_nodes.push_back(tape.Variable(m.Layer(e.name)));
  const ModelSpec& spec = m.spec();
  const int64_t n = images.dim(0);
  auto p = [&](size_t i) { return param_nodes[i]; };
  switch (spec.arch) {
    case Architecture::kLinear:
    case Architecture::kSlp: {
      auto x = tape.Constant(images.Reshaped({n, spec.input_size()}));
      auto y = tape.Affine(x, p(0), p(1));
      return spec.arch == Architecture::kSlp ? tape.Relu(y) : y;
    }
    case Architecture::kMlp: {
      auto h = tape.Constant(images.Reshaped({n, spec.input_size()}));
      size_t i = 0;
      for (; i + 2 < param_nodes.size(); i += 2) h = tape.Relu(tape.Affine(h, p(i), p(i + 1)));
      return tape.Affine(h, p(i), p(i + 1));
    }
    case Architecture::kCnn: {
      Shape in = {n};
      in.insert(in.end(), spec.input_shape.begin(), spec.input_shape.end());
      auto x = tape.Constant(images.Reshaped(in));
      auto h = tape.Relu(tape.Conv2d(x, p(0), p(1), kCnnConv));
      h = tape.Relu(tape.Conv2d(h, p(2), p(3), kCnnConv));
      h = tape.Reshape(h, {n, tape.value(h).size() / n});
      return tape.Affine(h, p(4), p(5));
    }
  }
  throw InvalidArgument("unknown architecture");
}

}  // namespace

Tensor Model::Logits(const Tensor& images) const {
  CheckInput(spec_, images);
  GradTape tape;
  std::vector<GradTape::NodeId> nodes;
  return tape.value(Forward(*this, images, tape, nodes));
}

std::vector<int> Model::Predict(const Tensor& images) const {
  Tensor logits = Logits(images);
  const int64_t n = logits.dim(0), c = logits.dim(1);
  std::vector<int> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    int best = 0;
    for (int64_t j = 1; j < c; ++j) {
      if (logits.at(i, j) > logits.at(i, best)) best = static_cast<int>(j);
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

double Model::LossAndGradient(const Tensor& images, std::span<const int> labels,
                              std::vector<double>* grad) const {
  CheckInput(spec_, images);
  GradTape tape;
  std::vector<GradTape::NodeId> nodes;
  const auto logits = Forward(*this, images, tape, nodes);
  XentResult r = SoftmaxXent(tape.value(logits), labels);
  if (grad != nullptr) {
    tape.Backward(logits, r.dlogits);
    grad->assign(params_.size(), 0.0);
    for (size_t i = 0; i < nodes.size(); ++i) {
      const auto& g = tape.grad(nodes[i]).storage();
      std::copy(g.begin(), g.end(), grad->begin() + layout_[i].offset);
    }
  }
  return r.loss;
}

Tensor Model::PerExampleGradients(const Tensor& images, std::span<const int> labels) const {
  CheckInput(spec_, images);
  const int64_t n = images.dim(0), in = spec_.input_size(), d = num_params();
  if (static_cast<int64_t>(labels.size()) != n) {
    throw InvalidArgument(fmt::format("{} labels for {} images", labels.size(), n));
  }
  Tensor out({n, d});
  std::vector<double> g;
  for (int64_t b = 0; b < n; ++b) {
    Tensor one({1, in}, std::vector<double>(images.data().begin() + b * in,
                                            images.data().begin() + (b + 1) * in));
    LossAndGradient(one, labels.subspan(static_cast<size_t>(b), 1), &g);
    std::copy(g.begin(), g.end(), out.data().begin() + b * d);
  }
  return out;
}

double Evaluate(const Model& model, const Dataset& data) {
  if (data.num_classes != model.spec().num_classes) {
    throw InvalidArgument(fmt::format("dataset has {} classes, model predicts {}",
                                      data.num_classes, model.spec().num_classes));
  }
  if (data.sample_size() != model.spec().input_size()) {
    throw InvalidArgument(fmt::format("dataset samples have {} values, model expects {}",
                                      data.sample_size(), model.spec().input_size()));
  }
  if (data.size() == 0) return 0.0;
  constexpr int64_t kChunk = 1000;
  int64_t correct = 0;
  for (int64_t start = 0; start < data.size(); start += kChunk) {
    const int64_t stop = std::min(data.size(), start + kChunk);
    std::vector<int64_t> idx;
    for (int64_t i = start; i < stop; ++i) idx.push_back(i);
    Batch b = Gather(data, idx);
    const auto pred = model.Predict(b.images);
    for (size_t i = 0; i < pred.size(); ++i) correct += pred[i] == b.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace fllab
