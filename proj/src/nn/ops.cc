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

#include "fllab/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>
#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap AsMatrix(const Tensor& t, int64_t rows, int64_t cols) {
  return ConstMatrixMap(t.data().data(), rows, cols);
}

MatrixMap AsMatrix(Tensor& t, int64_t rows, int64_t cols) {
  return MatrixMap(t.data().data(), rows, cols);
}

void RequireRank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw InvalidArgument(fmt::format("{} must have rank {}, got shape {}", what, rank,
                                      ShapeToString(t.shape())));
  }
}

}  // namespace

Tensor AffineForward(const Tensor& x, const Tensor& w, const Tensor& b) {
  RequireRank(x, 2, "affine input");
  RequireRank(w, 2, "affine weight");
  if (x.dim(1) != w.dim(0) || b.size() != w.dim(1)) {
    throw InvalidArgument(fmt::format("affine shape mismatch: x {} vs W {} and b {}",
                                      ShapeToString(x.shape()), ShapeToString(w.shape()),
                                      ShapeToString(b.shape())));
  }
  const int64_t n = x.dim(0), in = x.dim(1), out = w.dim(1);
  Tensor y({n, out});
  auto ym = AsMatrix(y, n, out);
  ym.noalias() = AsMatrix(x, n, in) * AsMatrix(w, in, out);
  Eigen::Map<const Eigen::RowVectorXd> bv(b.data().data(), out);
  ym.rowwise() += bv;
  return y;
}

AffineGrads AffineBackward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  const int64_t n = x.dim(0), in = x.dim(1), out = w.dim(1);
  if (dy.rank() != 2 || dy.dim(0) != n || dy.dim(1) != out) {
    throw InvalidArgument(fmt::format("affine backward: dy {} does not match output [{}, {}]",
                                      ShapeToString(dy.shape()), n, out));
  }
  AffineGrads g{Tensor({n, in}), Tensor({in, out}), Tensor({out})};
  auto dym = AsMatrix(dy, n, out);
  AsMatrix(g.dx, n, in).noalias() = dym * AsMatrix(w, in, out).transpose();
  AsMatrix(g.dw, in, out).noalias() = AsMatrix(x, n, in).transpose() * dym;
  Eigen::Map<Eigen::RowVectorXd>(g.db.data().data(), out) = dym.colwise().sum();
  return g;
}

Tensor ReluForward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor ReluBackward(const Tensor& x, const Tensor& dy) {
  if (x.shape() != dy.shape()) {
    throw InvalidArgument(fmt::format("relu backward: x {} vs dy {}", ShapeToString(x.shape()),
                                      ShapeToString(dy.shape())));
  }
  Tensor dx(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

int64_t ConvOutputSize(int64_t size, int64_t kernel, int64_t stride, int64_t pad) {
  if (stride < 1 || pad < 0 || kernel < 1) {
    throw InvalidArgument(fmt::format("bad conv geometry: kernel {} stride {} pad {}", kernel,
                                      stride, pad));
  }
  const int64_t span = size + 2 * pad - kernel;
  if (span < 0) {
    throw InvalidArgument(fmt::format("kernel {} does not fit input {} with pad {}", kernel,
                                      size, pad));
  }
  return span / stride + 1;
}

Tensor Conv2dForward(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                     Conv2dParams p) {
  RequireRank(x, 4, "conv input");
  RequireRank(kernels, 4, "conv kernels");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t o = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  if (kernels.dim(1) != c) {
    throw InvalidArgument(fmt::format("conv channel mismatch: x {} vs kernels {}",
                                      ShapeToString(x.shape()),
                                      ShapeToString(kernels.shape())));
  }
  if (bias.size() != 0 && bias.size() != o) {
    throw InvalidArgument(fmt::format("conv bias {} does not match {} output channels",
                                      ShapeToString(bias.shape()), o));
  }
  const int64_t oh = ConvOutputSize(h, kh, p.stride, p.pad);
  const int64_t ow = ConvOutputSize(w, kw, p.stride, p.pad);
  Tensor y({n, o, oh, ow});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t oc = 0; oc < o; ++oc) {
      const double bv = bias.size() ? bias[oc] : 0.0;
      for (int64_t i = 0; i < oh; ++i) {
        for (int64_t j = 0; j < ow; ++j) {
          double acc = bv;
          for (int64_t ic = 0; ic < c; ++ic) {
            for (int64_t u = 0; u < kh; ++u) {
              const int64_t r = i * p.stride + u - p.pad;
              if (r < 0 || r >= h) continue;
              for (int64_t v = 0; v < kw; ++v) {
                const int64_t s = j * p.stride + v - p.pad;
                if (s < 0 || s >= w) continue;
                acc += x[((b * c + ic) * h + r) * w + s] *
                       kernels[((oc * c + ic) * kh + u) * kw + v];
              }
            }
          }
          y[((b * o + oc) * oh + i) * ow + j] = acc;
        }
      }
    }
  }
  return y;
}

Conv2dGrads Conv2dBackward(const Tensor& x, const Tensor& kernels, const Tensor& dy,
                           Conv2dParams p) {
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t o = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  const int64_t oh = ConvOutputSize(h, kh, p.stride, p.pad);
  const int64_t ow = ConvOutputSize(w, kw, p.stride, p.pad);
  if (dy.shape() != Shape{n, o, oh, ow}) {
    throw InvalidArgument(fmt::format("conv backward: dy {} does not match output {}",
                                      ShapeToString(dy.shape()),
                                      ShapeToString({n, o, oh, ow})));
  }
  Conv2dGrads g{Tensor(x.shape()), Tensor(kernels.shape()), Tensor({o})};
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t oc = 0; oc < o; ++oc) {
      for (int64_t i = 0; i < oh; ++i) {
        for (int64_t j = 0; j < ow; ++j) {
          const double gy = dy[((b * o + oc) * oh + i) * ow + j];
          g.dbias[oc] += gy;
          for (int64_t ic = 0; ic < c; ++ic) {
            for (int64_t u = 0; u < kh; ++u) {
              const int64_t r = i * p.stride + u - p.pad;
              if (r < 0 || r >= h) continue;
              for (int64_t v = 0; v < kw; ++v) {
                const int64_t s = j * p.stride + v - p.pad;
                if (s < 0 || s >= w) continue;
                const int64_t xi = ((b * c + ic) * h + r) * w + s;
                const int64_t ki = ((oc * c + ic) * kh + u) * kw + v;
                g.dkernels[ki] += gy * x[xi];
                g.dx[xi] += gy * kernels[ki];
              }
            }
          }
        }
      }
    }
  }
  return g;
}

MaxPoolResult MaxPool2dForward(const Tensor& x, int64_t window, int64_t stride) {
  RequireRank(x, 4, "max-pool input");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t oh = ConvOutputSize(h, window, stride, 0);
  const int64_t ow = ConvOutputSize(w, window, stride, 0);
  MaxPoolResult out{Tensor({n, c, oh, ow}), std::vector<int64_t>(static_cast<size_t>(n * c * oh * ow))};
  for (int64_t b = 0; b < n * c; ++b) {
    for (int64_t i = 0; i < oh; ++i) {
      for (int64_t j = 0; j < ow; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        int64_t arg = -1;
        for (int64_t u = 0; u < window; ++u) {
          for (int64_t v = 0; v < window; ++v) {
            const int64_t xi = (b * h + i * stride + u) * w + j * stride + v;
            if (x[xi] > best) {
              best = x[xi];
              arg = xi;
            }
          }
        }
        const int64_t yi = (b * oh + i) * ow + j;
        out.y[yi] = best;
        out.argmax[static_cast<size_t>(yi)] = arg;
      }
    }
  }
  return out;
}

Tensor MaxPool2dBackward(const Shape& x_shape, std::span<const int64_t> argmax,
                         const Tensor& dy) {
  if (static_cast<int64_t>(argmax.size()) != dy.size()) {
    throw InvalidArgument("max-pool backward: argmax and dy sizes differ");
  }
  Tensor dx(x_shape);
  for (int64_t i = 0; i < dy.size(); ++i) dx[argmax[static_cast<size_t>(i)]] += dy[i];
  return dx;
}

Tensor Softmax(const Tensor& logits) {
  RequireRank(logits, 2, "softmax input");
  const int64_t n = logits.dim(0), c = logits.dim(1);
  Tensor p(logits.shape());
  for (int64_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < c; ++j) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      p.at(i, j) = std::exp(logits.at(i, j) - mx);
      z += p.at(i, j);
    }
    for (int64_t j = 0; j < c; ++j) p.at(i, j) /= z;
  }
  return p;
}

XentResult SoftmaxXent(const Tensor& logits, std::span<const int> labels) {
  RequireRank(logits, 2, "logits");
  const int64_t n = logits.dim(0), c = logits.dim(1);
  if (static_cast<int64_t>(labels.size()) != n) {
    throw InvalidArgument(fmt::format("{} labels for {} logit rows", labels.size(), n));
  }
  XentResult r{0.0, Tensor(logits.shape())};
  for (int64_t i = 0; i < n; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= c) {
      throw InvalidArgument(fmt::format("label {} out of range [0, {})", y, c));
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < c; ++j) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (int64_t j = 0; j < c; ++j) z += std::exp(logits.at(i, j) - mx);
    const double log_z = mx + std::log(z);
    r.loss += log_z - logits.at(i, y);
    for (int64_t j = 0; j < c; ++j) {
      const double pj = std::exp(logits.at(i, j) - log_z);
      r.dlogits.at(i, j) = (pj - (j == y ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  r.loss /= static_cast<double>(n);
  return r;
}

double GradCheck(const Objective& f, std::span<const double> params, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("grad check eps must be positive");
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> analytic;
  const double f0 = f(theta, &analytic);
  if (!std::isfinite(f0)) throw NumericalError("grad check: objective is not finite");
  if (analytic.size() != theta.size()) {
    throw InvalidArgument("grad check: objective returned a gradient of the wrong size");
  }
  double worst = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double fp = f(theta, nullptr);
    theta[i] = saved - eps;
    const double fm = f(theta, nullptr);
    theta[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(analytic[i])) {
      throw NumericalError(fmt::format("grad check: non-finite value at coordinate {}", i));
    }
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[i];
    if (a == 0.0 && numeric == 0.0) continue;
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace fllab
