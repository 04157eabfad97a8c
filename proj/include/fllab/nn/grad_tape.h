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

#ifndef FLLAB_NN_GRAD_TAPE_H_
#define FLLAB_NN_GRAD_TAPE_H_

#include <cstdint>
#include <vector>

#include "fllab/nn/ops.h"
#include "fllab/nn/tensor.h"

namespace fllab {

// Records primitive ops in execution order and replays them backward.
// Node ids are indices into the tape. A tape is single-use: build the graph,
// call Backward once, read gradients.
class GradTape {
 public:
  using NodeId = int;

  NodeId Variable(Tensor value);
  NodeId Constant(Tensor value);

  NodeId Affine(NodeId x, NodeId w, NodeId b);
  NodeId Relu(NodeId x);
  NodeId Conv2d(NodeId x, NodeId kernels, NodeId bias, Conv2dParams params);
  NodeId MaxPool2d(NodeId x, int64_t window, int64_t stride);
  NodeId Reshape(NodeId x, Shape shape);

  const Tensor& value(NodeId id) const { return nodes_.at(Index(id)).value; }

  // Seeds d(output) with `seed` and propagates to every node that feeds it.
  void Backward(NodeId output, const Tensor& seed);

  // Gradient of the seeded objective with respect to node `id`. Zero for
  // nodes that do not influence the output.
  const Tensor& grad(NodeId id) const;

  // How many times Backward processed node `id`.
  int visits(NodeId id) const { return nodes_.at(Index(id)).visits; }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Kind { kVariable, kConstant, kAffine, kRelu, kConv2d, kMaxPool2d, kReshape };

  struct Node {
    Kind kind;
    Tensor value;
    std::vector<NodeId> inputs;
    Conv2dParams conv;
    std::vector<int64_t> argmax;
    Tensor grad;
    int visits = 0;
  };

  static size_t Index(NodeId id) { return static_cast<size_t>(id); }
  NodeId Push(Node node);
  void Accumulate(NodeId id, const Tensor& g);

  std::vector<Node> nodes_;
};

}  // namespace fllab

#endif  // FLLAB_NN_GRAD_TAPE_H_
