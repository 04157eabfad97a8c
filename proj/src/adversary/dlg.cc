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

#include "fllab/adversary/dlg.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Core>
#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const Mat>;

void RowSoftmax(Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double top = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - top).exp();
    m.row(i) /= m.row(i).sum();
  }
}

}  // namespace

PsnrValue Psnr(std::span<const double> original, std::span<const double> reconstructed) {
  if (original.size() != reconstructed.size() || original.empty()) {
    throw InvalidArgument(fmt::format("PSNR needs equal non-empty images, got {} and {} values",
                                      original.size(), reconstructed.size()));
  }
  double mse = 0;
  for (size_t i = 0; i < original.size(); ++i) {
    const double e = original[i] - reconstructed[i];
    mse += e * e;
  }
  mse /= static_cast<double>(original.size());
  if (mse == 0) return {kPsnrCapDb, true};
  return {std::min(kPsnrCapDb, -10.0 * std::log10(mse)), false};
}

void DlgConfig::Validate() const {
  if (iterations < 0) throw ConfigError("DLG iterations must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("DLG learning rate must be > 0");
  if (max_restarts < 0) throw ConfigError("DLG max restarts must be >= 0");
}

double DlgObjective(const Model& model, std::span<const double> observed,
                    std::span<const double> x, std::span<const double> label_logits,
                    int64_t batch, std::vector<double>* dx, std::vector<double>* dlabels) {
  const Architecture arch = model.spec().arch;
  if (arch != Architecture::kLinear && arch != Architecture::kSlp) {
    throw InvalidArgument(
        fmt::format("gradient inversion supports linear and slp models, not {}",
                    ArchitectureName(arch)));
  }
  const int64_t d = model.spec().input_size();
  const int64_t c = model.spec().num_classes;
  if (static_cast<int64_t>(observed.size()) != model.num_params() ||
      static_cast<int64_t>(x.size()) != batch * d ||
      static_cast<int64_t>(label_logits.size()) != batch * c) {
    throw InvalidArgument("gradient inversion buffers do not match the model");
  }
  const ConstMap w(model.params().data(), d, c);
  const Eigen::Map<const Eigen::RowVectorXd> bias(model.params().data() + d * c, c);
  const ConstMap xm(x.data(), batch, d);
  const ConstMap ow(observed.data(), d, c);
  const Eigen::Map<const Eigen::RowVectorXd> ob(observed.data() + d * c, c);

  const Mat s = (xm * w).rowwise() + bias;
  const bool relu = arch == Architecture::kSlp;
  const Mat mask = relu ? Mat((s.array() > 0).cast<double>()) : Mat::Ones(batch, c);
  Mat p = relu ? Mat(s.cwiseMax(0.0)) : s;
  RowSoftmax(p);
  Mat y = ConstMap(label_logits.data(), batch, c);
  RowSoftmax(y);
  const Mat delta = (p - y).cwiseProduct(mask);

  const double inv_b = 1.0 / static_cast<double>(batch);
  const Mat rw = xm.transpose() * delta * inv_b - ow;
  const Eigen::RowVectorXd rb = delta.colwise().sum() * inv_b - ob;
  const double loss = rw.squaredNorm() + rb.squaredNorm();
  if (dx == nullptr && dlabels == nullptr) return loss;

  // Sensitivity of the loss to each sample's masked residual.
  const Mat q = ((xm * rw).rowwise() + rb) * (2.0 * inv_b);
  const Mat qm = q.cwiseProduct(mask);
  if (dx != nullptr) {
    Mat ds(batch, c);
    for (Eigen::Index i = 0; i < batch; ++i) {
      ds.row(i) = p.row(i).cwiseProduct(
          (qm.row(i).array() - p.row(i).dot(qm.row(i))).matrix());
    }
    ds = ds.cwiseProduct(mask);
    dx->resize(static_cast<size_t>(batch * d));
    Eigen::Map<Mat> gx(dx->data(), batch, d);
    gx = delta * rw.transpose() * (2.0 * inv_b) + ds * w.transpose();
  }
  if (dlabels != nullptr) {
    dlabels->resize(static_cast<size_t>(batch * c));
    Eigen::Map<Mat> gl(dlabels->data(), batch, c);
    for (Eigen::Index i = 0; i < batch; ++i) {
      gl.row(i) =
          -y.row(i).cwiseProduct((qm.row(i).array() - y.row(i).dot(qm.row(i))).matrix());
    }
  }
  return loss;
}

ReconstructionResult DlgAttackFrom(const Model& model, std::span<const double> observed,
                                   int64_t batch, std::vector<double> x,
                                   std::vector<double> label_logits, const DlgConfig& config) {
  config.Validate();
  if (batch < 1) throw InvalidArgument("reconstruction batch must be >= 1");
  for (double v : observed) {
    if (!std::isfinite(v)) throw NumericalError("observed gradient is not finite");
  }
  const std::vector<double> x0 = x, l0 = label_logits;
  ReconstructionResult r;
  std::vector<double> gx, gl, tx, tl;
  double loss = DlgObjective(model, observed, x, label_logits, batch, &gx, &gl);
  if (!std::isfinite(loss)) throw NumericalError("gradient-matching loss is not finite at start");
  std::vector<double> best_x = x, best_l = label_logits;
  double best = loss;
  double lr = config.learning_rate;
  r.loss_trace.push_back(loss);
  int it = 0;
  while (it < config.iterations && loss > config.tolerance) {
    ++it;
    tx.resize(x.size());
    tl.resize(label_logits.size());
    for (size_t i = 0; i < x.size(); ++i) tx[i] = std::clamp(x[i] - lr * gx[i], 0.0, 1.0);
    for (size_t i = 0; i < tl.size(); ++i) tl[i] = label_logits[i] - lr * gl[i];
    std::vector<double> ngx, ngl;
    const double next = DlgObjective(model, observed, tx, tl, batch, &ngx, &ngl);
    if (!std::isfinite(next)) {
      // Divergence: go back to the start with a smaller step.
      if (r.restarts == config.max_restarts) break;
      ++r.restarts;
      lr = config.learning_rate * std::pow(0.1, r.restarts);
      x = x0;
      label_logits = l0;
      loss = DlgObjective(model, observed, x, label_logits, batch, &gx, &gl);
      continue;
    }
    if (next <= loss) {
      x.swap(tx);
      label_logits.swap(tl);
      gx.swap(ngx);
      gl.swap(ngl);
      loss = next;
      lr *= 1.2;
      r.loss_trace.push_back(loss);
      if (loss < best) {
        best = loss;
        best_x = x;
        best_l = label_logits;
      }
    } else {
      lr *= 0.5;
      if (lr < 1e-14) break;
    }
  }
  const Model& m = model;
  Shape shape = {batch};
  for (int64_t v : m.spec().input_shape) shape.push_back(v);
  r.images = Tensor(shape, std::move(best_x));
  Mat y = ConstMap(best_l.data(), batch, m.spec().num_classes);
  RowSoftmax(y);
  r.soft_labels.assign(y.data(), y.data() + y.size());
  r.iterations = it;
  r.loss = best;
  return r;
}

ReconstructionResult DlgAttack(const Model& model, std::span<const double> observed, int64_t batch,
                               const DlgConfig& config, Rng& rng) {
  const int64_t d = model.spec().input_size();
  const int64_t c = model.spec().num_classes;
  std::vector<double> x(static_cast<size_t>(batch * d));
  std::vector<double> l(static_cast<size_t>(batch * c));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& v : x) v = unit(rng);
  for (double& v : l) v = StandardNormal(rng);
  return DlgAttackFrom(model, observed, batch, std::move(x), std::move(l), config);
}

void ScoreReconstruction(const Tensor& originals, ReconstructionResult* result) {
  const int64_t n = result->images.shape()[0];
  if (originals.shape() != result->images.shape()) {
    throw InvalidArgument("reconstruction and original batches differ in shape");
  }
  const int64_t per = originals.size() / n;
  std::vector<PsnrValue> table(static_cast<size_t>(n * n));
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      table[static_cast<size_t>(i * n + j)] =
          Psnr(originals.data().subspan(static_cast<size_t>(j * per), static_cast<size_t>(per)),
               result->images.data().subspan(static_cast<size_t>(i * per),
                                             static_cast<size_t>(per)));
    }
  }
  result->psnr.assign(static_cast<size_t>(n), {});
  result->matched.assign(static_cast<size_t>(n), -1);
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (int64_t step = 0; step < n; ++step) {
    int64_t bi = -1, bj = -1;
    double top = -std::numeric_limits<double>::infinity();
    for (int64_t i = 0; i < n; ++i) {
      if (result->matched[static_cast<size_t>(i)] >= 0) continue;
      for (int64_t j = 0; j < n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double v = table[static_cast<size_t>(i * n + j)].db;
        if (v > top) {
          top = v;
          bi = i;
          bj = j;
        }
      }
    }
    result->matched[static_cast<size_t>(bi)] = static_cast<int>(bj);
    result->psnr[static_cast<size_t>(bi)] = table[static_cast<size_t>(bi * n + bj)];
    used[static_cast<size_t>(bj)] = true;
  }
}

double MeanPsnr(const ReconstructionResult& result) {
  if (result.psnr.empty()) throw InvalidArgument("reconstruction has not been scored");
  double s = 0;
  for (const PsnrValue& p : result.psnr) s += p.db;
  return s / static_cast<double>(result.psnr.size());
}

ReconstructionResult RunDlgTrial(const Model& model, const Dataset& data, const DlgTrial& trial,
                                 const DlgConfig& config, Tensor* originals) {
  if (trial.num_users < 1 || trial.batch < 1) {
    throw InvalidArgument("attack trial needs at least one user and one sample");
  }
  const int64_t need = trial.num_users * trial.batch;
  if (need > data.size()) {
    throw InvalidArgument(fmt::format("dataset of {} samples is smaller than {} users x {}",
                                      data.size(), trial.num_users, trial.batch));
  }
  Rng pick = MakeRng(trial.seed, {0xd19});
  std::vector<int64_t> all(static_cast<size_t>(data.size()));
  std::iota(all.begin(), all.end(), 0);
  const std::vector<int64_t> drawn = SampleBatch(all, need, pick);

  std::vector<double> observed(static_cast<size_t>(model.num_params()), 0.0);
  Tensor target;
  for (int u = 0; u < trial.num_users; ++u) {
    const std::span<const int64_t> idx(drawn.data() + u * trial.batch,
                                       static_cast<size_t>(trial.batch));
    const Batch b = Gather(data, idx);
    std::vector<double> g;
    model.LossAndGradient(b.images, b.labels, &g);
    for (size_t j = 0; j < g.size(); ++j) observed[j] += g[j] / trial.num_users;
    if (u == 0) target = b.images;
  }
  Rng rng = MakeRng(trial.seed, {0xd1a});
  ReconstructionResult r = DlgAttack(model, observed, trial.batch, config, rng);
  ScoreReconstruction(target, &r);
  if (originals != nullptr) *originals = std::move(target);
  return r;
}

void WritePnm(const std::string& path, std::span<const double> image, const Shape& shape) {
  if (shape.size() != 3 || (shape[0] != 1 && shape[0] != 3)) {
    throw InvalidArgument("image export needs a [1|3, h, w] image");
  }
  const int64_t c = shape[0], h = shape[1], w = shape[2];
  if (static_cast<int64_t>(image.size()) != c * h * w) {
    throw InvalidArgument("image size does not match its shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  out << (c == 1 ? "P5" : "P6") << "\n" << w << " " << h << "\n255\n";
  std::vector<char> bytes(static_cast<size_t>(c * h * w));
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t k = 0; k < c; ++k) {
        const double v = std::clamp(image[static_cast<size_t>((k * h + y) * w + x)], 0.0, 1.0);
        bytes[static_cast<size_t>((y * w + x) * c + k)] =
            static_cast<char>(static_cast<uint8_t>(std::lround(v * 255.0)));
      }
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void WriteRawF64(const std::string& path, std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little, "raw dumps assume little endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace fllab
