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

#include "fllab/mi/mine.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "sample-set files are written in host byte order");

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Adam state for one parameter block.
struct AdamSlot {
  Matrix m, v;
  void Init(Eigen::Index r, Eigen::Index c) {
    m = Matrix::Zero(r, c);
    v = Matrix::Zero(r, c);
  }
};

struct Layer {
  Matrix w;  // in x out
  Eigen::RowVectorXd b;
  Matrix dw;
  Eigen::RowVectorXd db;
  AdamSlot aw, ab;
};

class Critic {
 public:
  Critic(Eigen::Index in, const std::vector<int>& hidden, Rng& rng) {
    Eigen::Index prev = in;
    std::vector<int> widths = hidden;
    widths.push_back(1);
    for (int width : widths) {
      Layer l;
      const double bound = 1.0 / std::sqrt(static_cast<double>(prev));
      l.w = Matrix(prev, width);
      l.b = Eigen::RowVectorXd(width);
      for (Eigen::Index i = 0; i < l.w.size(); ++i) l.w.data()[i] = UniformDouble(rng, -bound, bound);
      for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = UniformDouble(rng, -bound, bound);
      l.dw = Matrix::Zero(prev, width);
      l.db = Eigen::RowVectorXd::Zero(width);
      l.aw.Init(prev, width);
      l.ab.Init(1, width);
      layers_.push_back(std::move(l));
      prev = width;
    }
  }

  // Scores for each row of `input`; keeps activations for Backward.
  Vector Forward(const Matrix& input, std::vector<Matrix>* acts) const {
    Matrix h = input;
    if (acts) acts->assign(1, h);
    for (size_t i = 0; i < layers_.size(); ++i) {
      Matrix pre = h * layers_[i].w;
      pre.rowwise() += layers_[i].b;
      if (i + 1 < layers_.size()) pre = pre.cwiseMax(0.0);
      h = std::move(pre);
      if (acts) acts->push_back(h);
    }
    return h.col(0);
  }

  // Accumulates d(loss)/d(params) given d(loss)/d(scores).
  void Backward(const std::vector<Matrix>& acts, const Vector& dscore) {
    Matrix g = dscore;
    for (size_t i = layers_.size(); i-- > 0;) {
      Layer& l = layers_[i];
      l.dw.noalias() += acts[i].transpose() * g;
      l.db += g.colwise().sum();
      if (i > 0) {
        Matrix dh = g * l.w.transpose();
        g = (acts[i].array() > 0.0).select(dh, 0.0);
      }
    }
  }

  void Step(double lr, double weight_decay, int t) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const double c1 = 1.0 - std::pow(kBeta1, t), c2 = 1.0 - std::pow(kBeta2, t);
    auto update = [&](auto& p, auto& g, AdamSlot& s) {
      g += weight_decay * p;
      s.m = kBeta1 * s.m.array() + (1 - kBeta1) * g.array();
      s.v = kBeta2 * s.v.array() + (1 - kBeta2) * g.array().square();
      p.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + kEps);
      g.setZero();
    };
    for (Layer& l : layers_) {
      update(l.w, l.dw, l.aw);
      Matrix b = l.b, db = l.db;
      update(b, db, l.ab);
      l.b = b.row(0);
      l.db.setZero();
    }
  }

 private:
  std::vector<Layer> layers_;
};

double LogMeanExp(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().mean());
}

RowMatrix Standardize(const RowMatrix& a, const char* side) {
  const Eigen::RowVectorXd mean = a.colwise().mean();
  RowMatrix c = a.rowwise() - mean;
  const double n = static_cast<double>(a.rows());
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const double sd = std::sqrt(c.col(j).squaredNorm() / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean[j])))) {
      throw NumericalError(fmt::format("{} column {} has zero variance", side, j));
    }
    c.col(j) /= sd;
  }
  return c;
}

void PutU64(std::ofstream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t GetU64(std::ifstream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidArgument("truncated sample-set header");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{b[i]} << (8 * i);
  return v;
}

}  // namespace

void MineConfig::Validate() const {
  if (hidden.empty()) throw ConfigError("mine critic needs at least one hidden layer");
  for (int h : hidden) {
    if (h < 1) throw ConfigError(fmt::format("mine hidden width must be >= 1, got {}", h));
  }
  if (iterations < 1) throw ConfigError(fmt::format("mine iterations must be >= 1, got {}", iterations));
  if (!(learning_rate > 0)) throw ConfigError("mine learning rate must be > 0");
  if (!(ema_decay >= 0 && ema_decay < 1)) throw ConfigError("mine ema decay must lie in [0, 1)");
  if (!(weight_decay >= 0)) throw ConfigError("mine weight decay must be >= 0");
  if (eval_shuffles < 1) throw ConfigError("mine eval_shuffles must be >= 1");
}

MineResult MineEstimate(const SampleSet& samples, const MineConfig& config) {
  config.Validate();
  const Eigen::Index k = samples.x.rows();
  if (k < 2 || samples.z.rows() != k) {
    throw InvalidArgument(fmt::format("mine needs K >= 2 paired samples, got {} x and {} z rows", k,
                                      samples.z.rows()));
  }
  if (samples.x.cols() < 1 || samples.z.cols() < 1) throw InvalidArgument("mine inputs are empty");
  if (!samples.x.allFinite() || !samples.z.allFinite()) throw InvalidArgument("mine inputs are not finite");

  const Eigen::Index dx = samples.x.cols(), dz = samples.z.cols();
  Matrix joint(k, dx + dz);
  joint.leftCols(dx) = Standardize(samples.x, "x");
  joint.rightCols(dz) = Standardize(samples.z, "z");
  Matrix marginal = joint;

  Rng rng = MakeRng(config.seed, {0x313e});
  Critic critic(dx + dz, config.hidden, rng);
  std::vector<Eigen::Index> perm(static_cast<size_t>(k));
  auto reshuffle = [&] {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < k; ++i) {
      marginal.row(i).tail(dz) = joint.row(perm[static_cast<size_t>(i)]).tail(dz);
    }
  };

  MineResult result;
  std::vector<Matrix> acts_j, acts_m;
  double log_ma = 0.0;
  const double inv_k = 1.0 / static_cast<double>(k);
  for (int it = 1; it <= config.iterations; ++it) {
    reshuffle();
    const Vector tj = critic.Forward(joint, &acts_j);
    const Vector tm = critic.Forward(marginal, &acts_m);
    const double log_et = LogMeanExp(tm);
    if (!std::isfinite(log_et) || !tj.allFinite()) {
      throw NumericalError(fmt::format("mine objective diverged at iteration {}", it));
    }
    if (it == 1) {
      log_ma = log_et;
    } else {
      // log(decay * ma + (1 - decay) * et) without leaving log space.
      const double a = std::log(config.ema_decay) + log_ma;
      const double b = std::log1p(-config.ema_decay) + log_et;
      const double hi = std::max(a, b);
      log_ma = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
    // Loss = -mean(tj) + mean(e^tm) / ma, with ma held constant.
    critic.Backward(acts_j, Vector::Constant(k, -inv_k));
    critic.Backward(acts_m, ((tm.array() - log_ma).exp() * inv_k).matrix());
    critic.Step(config.learning_rate, config.weight_decay, it);
    if (it % 100 == 0) result.trace_bits.push_back((tj.mean() - log_et) / std::log(2.0));
  }

  const Vector tj = critic.Forward(joint, nullptr);
  double marginal_term = 0.0;
  for (int r = 0; r < config.eval_shuffles; ++r) {
    reshuffle();
    marginal_term += LogMeanExp(critic.Forward(marginal, nullptr));
  }
  marginal_term /= config.eval_shuffles;
  result.nats = tj.mean() - marginal_term;
  if (!std::isfinite(result.nats)) throw NumericalError("mine estimate is not finite");
  result.bits = result.nats / std::log(2.0);
  return result;
}

void WriteSampleSet(const SampleSet& s, const std::string& path) {
  if (s.x.rows() != s.z.rows()) throw InvalidArgument("sample set sides differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  PutU64(out, static_cast<uint64_t>(s.x.rows()));
  PutU64(out, static_cast<uint64_t>(s.x.cols()));
  PutU64(out, static_cast<uint64_t>(s.z.cols()));
  out.write(reinterpret_cast<const char*>(s.x.data()), static_cast<std::streamsize>(s.x.size() * 8));
  out.write(reinterpret_cast<const char*>(s.z.data()), static_cast<std::streamsize>(s.z.size() * 8));
  if (!out) throw Error(fmt::format("failed writing {}", path));
}

SampleSet ReadSampleSet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  const uint64_t k = GetU64(in), dx = GetU64(in), dz = GetU64(in);
  if (k > (1u << 30) || dx > (1u << 30) || dz > (1u << 30)) {
    throw InvalidArgument("sample-set header is implausible");
  }
  SampleSet s{RowMatrix(k, dx), RowMatrix(k, dz)};
  in.read(reinterpret_cast<char*>(s.x.data()), static_cast<std::streamsize>(s.x.size() * 8));
  in.read(reinterpret_cast<char*>(s.z.data()), static_cast<std::streamsize>(s.z.size() * 8));
  if (!in) throw InvalidArgument("truncated sample-set payload");
  return s;
}

}  // namespace fllab
