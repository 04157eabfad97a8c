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

#include "fllab/nn/grad_tape.h"

#include <utility>

#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {

GradTape::NodeId GradTape::Push(Node node) {
  for (NodeId in : node.inputs) {
    if (in < 0 || in >= size()) throw InvalidArgument(fmt::format("unknown tape node {}", in));
  }
  nodes_.push_back(std::move(node));
  return size() - 1;
}

GradTape::NodeId GradTape::Variable(Tensor value) {
  return Push(Node{Kind::kVariable, std::move(value), {}, {}, {}, {}, 0});
}

GradTape::NodeId GradTape::Constant(Tensor value) {
  return Push(Node{Kind::kConstant, std::move(value), {}, {}, {}, {}, 0});
}

GradTape::NodeId GradTape::Affine(NodeId x, NodeId w, NodeId b) {
  Tensor y = AffineForward(value(x), value(w), value(b));
  return Push(Node{Kind::kAffine, std::move(y), {x, w, b}, {}, {}, {}, 0});
}

GradTape::NodeId GradTape::Relu(NodeId x) {
  return Push(Node{Kind::kRelu, ReluForward(value(x)), {x}, {}, {}, {}, 0});
}

GradTape::NodeId GradTape::Conv2d(NodeId x, NodeId kernels, NodeId bias, Conv2dParams params) {
  Tensor y = Conv2dForward(value(x), value(kernels), value(bias), params);
  return Push(Node{Kind::kConv2d, std::move(y), {x, kernels, bias}, params, {}, {}, 0});
}

GradTape::NodeId GradTape::MaxPool2d(NodeId x, int64_t window, int64_t stride) {
  MaxPoolResult r = MaxPool2dForward(value(x), window, stride);
  return Push(Node{Kind::kMaxPool2d, std::move(r.y), {x}, {}, std::move(r.argmax), {}, 0});
}

GradTape::NodeId GradTape::Reshape(NodeId x, Shape shape) {
  return Push(Node{Kind::kReshape, value(x).Reshaped(std::move(shape)), {x}, {}, {}, {}, 0});
}

void GradTape::Accumulate(NodeId id, const Tensor& g) {
  Node& n = nodes_[Index(id)];
  if (n.kind == Kind::kConstant) return;
  if (n.grad.size() == 0) {
    n.grad = g;
    return;
  }
  for (int64_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void GradTape::Backward(NodeId output, const Tensor& seed) {
  if (output < 0 || output >= size()) {
    throw InvalidArgument(fmt::format("unknown tape node {}", output));
  }
  if (seed.shape() != value(output).shape()) {
    throw InvalidArgument(fmt::format("seed shape {} does not match output {}",
                                      ShapeToString(seed.shape()),
                                      ShapeToString(value(output).shape())));
  }
  for (Node& n : nodes_) {
    n.grad = Tensor();
    n.visits = 0;
  }
  Accumulate(output, seed);
  for (NodeId id = output; id >= 0; --id) {
    Node& n = nodes_[Index(id)];
    if (n.grad.size() == 0) continue;
    ++n.visits;
    switch (n.kind) {
      case Kind::kVariable:
      case Kind::kConstant:
        break;
      case Kind::kAffine: {
        AffineGrads g = AffineBackward(value(n.inputs[0]), value(n.inputs[1]), n.grad);
        Accumulate(n.inputs[0], g.dx);
        Accumulate(n.inputs[1], g.dw);
        Accumulate(n.inputs[2], g.db);
        break;
      }
      case Kind::kRelu:
        Accumulate(n.inputs[0], ReluBackward(value(n.inputs[0]), n.grad));
        break;
      case Kind::kConv2d: {
        Conv2dGrads g = Conv2dBackward(value(n.inputs[0]), value(n.inputs[1]), n.grad, n.conv);
        Accumulate(n.inputs[0], g.dx);
        Accumulate(n.inputs[1], g.dkernels);
        if (value(n.inputs[2]).size() != 0) Accumulate(n.inputs[2], g.dbias);
        break;
      }
      case Kind::kMaxPool2d:
        Accumulate(n.inputs[0], MaxPool2dBackward(value(n.inputs[0]).shape(), n.argmax, n.grad));
        break;
      case Kind::kReshape:
        Accumulate(n.inputs[0], n.grad.Reshaped(value(n.inputs[0]).shape()));
        break;
    }
  }
  for (Node& n : nodes_) {
    if (n.grad.size() == 0) n.grad = Tensor(n.value.shape());
  }
}

const Tensor& GradTape::grad(NodeId id) const {
  return nodes_.at(Index(id)).grad;
}

}  // namespace fllab
