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

#include "fllab/data/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {

int64_t Dataset::sample_size() const {
  if (images.rank() < 1) return 0;
  int64_t n = 1;
  for (int i = 1; i < images.rank(); ++i) n *= images.dim(i);
  return n;
}

Shape Dataset::sample_shape() const {
  return Shape(images.shape().begin() + 1, images.shape().end());
}

std::span<const double> Dataset::sample(int64_t i) const {
  const int64_t s = sample_size();
  return images.data().subspan(static_cast<size_t>(i * s), static_cast<size_t>(s));
}

void Dataset::Validate() const {
  if (images.rank() < 2 || images.dim(0) != size()) {
    throw InvalidArgument(fmt::format("dataset has {} labels but images of shape {}", size(),
                                      ShapeToString(images.shape())));
  }
  if (num_classes < 1) throw InvalidArgument("dataset needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InvalidArgument(fmt::format("label {} outside [0, {})", y, num_classes));
    }
  }
  if (!(entropy_bits > 0.0)) throw InvalidArgument("per-sample entropy must be positive");
}

Dataset Dataset::Subset(std::span<const int64_t> indices) const {
  Batch b = Gather(*this, indices);
  return Dataset{std::move(b.images), std::move(b.labels), num_classes, entropy_bits};
}

Batch Gather(const Dataset& data, std::span<const int64_t> indices) {
  const int64_t s = data.sample_size();
  Shape shape = data.images.shape();
  shape[0] = static_cast<int64_t>(indices.size());
  Batch b{Tensor(shape), std::vector<int>(indices.size())};
  for (size_t k = 0; k < indices.size(); ++k) {
    const int64_t i = indices[k];
    if (i < 0 || i >= data.size()) {
      throw InvalidArgument(fmt::format("sample index {} outside dataset of size {}", i,
                                        data.size()));
    }
    auto src = data.sample(i);
    std::copy(src.begin(), src.end(), b.images.data().begin() + static_cast<int64_t>(k) * s);
    b.labels[k] = data.labels[static_cast<size_t>(i)];
  }
  return b;
}

Partition PartitionIid(const Dataset& data, int num_users, uint64_t seed) {
  const int64_t n = data.size();
  if (num_users < 1 || num_users > n) {
    throw InvalidArgument(fmt::format("cannot split {} samples across {} users", n, num_users));
  }
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = MakeRng(seed, {0x1d});
  std::shuffle(perm.begin(), perm.end(), rng);
  const int64_t per_user = n / num_users;
  Partition p;
  p.user_indices.resize(static_cast<size_t>(num_users));
  for (int u = 0; u < num_users; ++u) {
    auto first = perm.begin() + u * per_user;
    p.user_indices[static_cast<size_t>(u)].assign(first, first + per_user);
  }
  return p;
}

Partition PartitionDirichlet(const Dataset& data, int num_users, double alpha, uint64_t seed,
                             int max_retries) {
  if (std::isinf(alpha) && alpha > 0) return PartitionIid(data, num_users, seed);
  if (!(alpha > 0.0)) throw InvalidArgument(fmt::format("dirichlet alpha must be > 0, got {}", alpha));
  const int64_t n = data.size();
  if (num_users < 1 || num_users > n) {
    throw InvalidArgument(fmt::format("cannot split {} samples across {} users", n, num_users));
  }
  std::vector<std::vector<int64_t>> by_class(static_cast<size_t>(data.num_classes));
  for (int64_t i = 0; i < n; ++i) by_class[static_cast<size_t>(data.labels[static_cast<size_t>(i)])].push_back(i);

  Rng rng = MakeRng(seed, {0xd1});
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::uniform_int_distribution<int> any_user(0, num_users - 1);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    Partition p;
    p.user_indices.resize(static_cast<size_t>(num_users));
    for (auto& members : by_class) {
      if (members.empty()) continue;
      std::vector<int64_t> shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::vector<double> w(static_cast<size_t>(num_users));
      double total = 0.0;
      for (double& v : w) total += (v = gamma(rng));
      if (total <= 0.0) {
        // Every gamma draw underflowed; all mass goes to one user.
        std::fill(w.begin(), w.end(), 0.0);
        w[static_cast<size_t>(any_user(rng))] = 1.0;
        total = 1.0;
      }
      const auto m = static_cast<double>(shuffled.size());
      double cum = 0.0;
      size_t start = 0;
      for (int u = 0; u < num_users; ++u) {
        cum += w[static_cast<size_t>(u)] / total;
        size_t stop = u + 1 == num_users ? shuffled.size()
                                         : std::min(shuffled.size(), static_cast<size_t>(std::llround(cum * m)));
        stop = std::max(stop, start);
        auto& dst = p.user_indices[static_cast<size_t>(u)];
        dst.insert(dst.end(), shuffled.begin() + static_cast<int64_t>(start),
                   shuffled.begin() + static_cast<int64_t>(stop));
        start = stop;
      }
    }
    const bool all_nonempty = std::none_of(p.user_indices.begin(), p.user_indices.end(),
                                           [](const auto& v) { return v.empty(); });
    if (all_nonempty) {
      for (auto& v : p.user_indices) std::sort(v.begin(), v.end());
      return p;
    }
  }
  throw InvalidArgument(fmt::format(
      "dirichlet partition left a user empty after {} retries (alpha={}, N={}, n={})",
      max_retries, alpha, num_users, n));
}

Dataset SynthGaussian(int dim, int64_t n, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov, uint64_t seed) {
  if (dim < 1 || n < 1) throw InvalidArgument("synthetic gaussian needs dim >= 1 and n >= 1");
  if (mean.size() != dim || cov.rows() != dim || cov.cols() != dim) {
    throw InvalidArgument(fmt::format("mean/cov sizes {}/{}x{} do not match dim {}", mean.size(),
                                      cov.rows(), cov.cols(), dim));
  }
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw InvalidArgument("covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw InvalidArgument("covariance is not positive semidefinite");
  }
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Rng rng = MakeRng(seed, {0x6a});
  Dataset out{Tensor({n, dim}), std::vector<int>(static_cast<size_t>(n), 0), 1, 1.0};
  Eigen::VectorXd xi(dim);
  for (int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) xi[j] = StandardNormal(rng);
    Eigen::Map<Eigen::VectorXd>(out.images.data().data() + i * dim, dim) = mean + root * xi;
  }
  return out;
}

Dataset SynthClassification(int dim, int64_t n, int num_classes, double separation,
                            double entropy_bits, uint64_t seed) {
  if (dim < 1 || n < 1 || num_classes < 1) {
    throw InvalidArgument("synthetic classification needs positive dim, n and classes");
  }
  Rng rng = MakeRng(seed, {0xc1});
  std::vector<double> means(static_cast<size_t>(num_classes * dim));
  for (double& m : means) m = separation * StandardNormal(rng);
  Dataset out{Tensor({n, dim}), std::vector<int>(static_cast<size_t>(n)), num_classes,
              entropy_bits};
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  for (int64_t i = 0; i < n; ++i) {
    const int y = cls(rng);
    out.labels[static_cast<size_t>(i)] = y;
    for (int j = 0; j < dim; ++j) {
      out.images[i * dim + j] = means[static_cast<size_t>(y * dim + j)] + StandardNormal(rng);
    }
  }
  return out;
}

std::vector<int64_t> SampleBatch(std::span<const int64_t> indices, int64_t batch_size, Rng& rng) {
  const auto n = static_cast<int64_t>(indices.size());
  if (batch_size < 1 || batch_size > n) {
    throw InvalidArgument(fmt::format("batch size {} not in [1, {}]", batch_size, n));
  }
  std::vector<int64_t> pool(indices.begin(), indices.end());
  // Partial Fisher-Yates: the first B slots are a uniform B-subset in
  // uniform order.
  for (int64_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<int64_t> pick(i, n - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
  }
  pool.resize(static_cast<size_t>(batch_size));
  return pool;
}

}  // namespace fllab
