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

#ifndef FLLAB_NN_OPS_H_
#define FLLAB_NN_OPS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fllab/nn/tensor.h"

namespace fllab {

// y = x W + b for x [n, in], W [in, out], b [out].
Tensor AffineForward(const Tensor& x, const Tensor& w, const Tensor& b);

struct AffineGrads {
  Tensor dx;
  Tensor dw;
  Tensor db;
};
AffineGrads AffineBackward(const Tensor& x, const Tensor& w, const Tensor& dy);

// Elementwise max(0, x). The subgradient at 0 is 0.
Tensor ReluForward(const Tensor& x);
Tensor ReluBackward(const Tensor& x, const Tensor& dy);

struct Conv2dParams {
  int64_t stride = 1;
  int64_t pad = 0;
};

// Output spatial size floor((size + 2 pad - kernel) / stride) + 1; throws
// InvalidArgument when the geometry yields no output.
int64_t ConvOutputSize(int64_t size, int64_t kernel, int64_t stride, int64_t pad);

// Cross-correlation of x [n, c, h, w] with kernels [o, c, kh, kw] and
// zero padding. `bias` is [o] or empty.
Tensor Conv2dForward(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                     Conv2dParams params);

struct Conv2dGrads {
  Tensor dx;
  Tensor dkernels;
  Tensor dbias;
};
Conv2dGrads Conv2dBackward(const Tensor& x, const Tensor& kernels, const Tensor& dy,
                           Conv2dParams params);

struct MaxPoolResult {
  Tensor y;
  std::vector<int64_t> argmax;  // flat index into x for each output element
};
MaxPoolResult MaxPool2dForward(const Tensor& x, int64_t window, int64_t stride);
Tensor MaxPool2dBackward(const Shape& x_shape, std::span<const int64_t> argmax,
                         const Tensor& dy);

struct XentResult {
  double loss = 0.0;  // mean cross-entropy, nats
  Tensor dlogits;     // (softmax - onehot) / n
};
XentResult SoftmaxXent(const Tensor& logits, std::span<const int> labels);

// Row-wise softmax of a [n, c] tensor.
Tensor Softmax(const Tensor& logits);

// Objective returning f(params) and writing the analytic gradient to `grad`.
using Objective = std::function<double(std::span<const double> params,
                                       std::vector<double>* grad)>;

// Largest relative error between the analytic gradient and central finite
// differences over all coordinates. Relative error is
// |a - n| / max(|a|, |n|, 1e-7); coordinates where both are zero count as 0.
double GradCheck(const Objective& f, std::span<const double> params, double eps);

}  // namespace fllab

#endif  // FLLAB_NN_OPS_H_
