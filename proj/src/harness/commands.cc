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

#include "fllab/harness/commands.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "fllab/adversary/counterexample.h"
#include "fllab/adversary/dlg.h"
#include "fllab/adversary/dp.h"
#include "fllab/bounds/bounds.h"
#include "fllab/fl/fl.h"
#include "fllab/mi/leakage.h"
#include "fllab/mi/mine.h"
#include "fllab/model/model.h"
#include "fllab/util/error.h"
#include "fllab/util/linalg.h"
#include "fllab/util/parallel.h"
#include "fllab/util/rng.h"
#include "fllab/util/stats.h"

namespace fllab {
namespace {

// Seed tags, one per independent stream a command draws from.
constexpr uint64_t kModelTag = 0x30;
constexpr uint64_t kPartitionTag = 0x9a;
constexpr uint64_t kProjectionTag = 0x9b;
constexpr uint64_t kMineTag = 0x31;
constexpr uint64_t kGradientTag = 0xb0d;
constexpr uint64_t kAttackTag = 0xa7;
constexpr uint64_t kDpNoiseTag = 0xdbb;

ReportRow BaseRow(const ExperimentConfig& c, const std::string& command) {
  ReportRow r;
  r.experiment = c.id;
  r.command = command;
  r.protocol = ProtocolName(c.fl.protocol);
  r.num_users = c.fl.num_users;
  r.batch_size = c.fl.batch_size;
  r.local_epochs = c.fl.local_epochs;
  r.seed = c.seed;
  return r;
}

Model InitialModel(const ExperimentConfig& c, const Dataset& data) {
  return Model::Build(ModelSpec::For(c.model, data.sample_shape(), data.num_classes),
                      DeriveSeed(c.seed, {kModelTag}));
}

FlConfig CellFl(const ExperimentConfig& c, int n, int b) {
  FlConfig f = c.fl;
  f.num_users = n;
  f.batch_size = b;
  f.seed = c.seed;
  f.jobs = c.jobs;
  f.dp = c.dp;
  return f;
}

Partition MakePartition(const ExperimentConfig& c, const Dataset& data, int n) {
  const uint64_t seed = DeriveSeed(c.seed, {kPartitionTag, static_cast<uint64_t>(n)});
  return std::isinf(c.alpha) ? PartitionIid(data, n, seed)
                             : PartitionDirichlet(data, n, c.alpha, seed);
}

MineConfig MineFor(const ExperimentConfig& c) {
  MineConfig m = c.mi.mine;
  m.seed = DeriveSeed(c.seed, {kMineTag});
  return m;
}

struct BoundInputs {
  int64_t d_star = 0;
  double c0 = 0.0;
  double h_g = 0.0;
  double logdet = 0.0;
};

BoundInputs EstimateBoundInputs(const ExperimentConfig& c, const Model& model,
                                const Dataset& data, std::vector<std::string>* warnings) {
  BoundInputs in;
  if (c.bounds.d_star > 0 && c.bounds.c0 >= 0) {
    in.d_star = c.bounds.d_star;
    in.c0 = c.bounds.c0;
    in.h_g = 0.5 * static_cast<double>(in.d_star) * std::log(2 * std::numbers::pi * std::numbers::e);
    return in;
  }
  const int64_t m = std::min<int64_t>(c.bounds.gradient_samples, data.size());
  std::vector<int64_t> all(static_cast<size_t>(data.size()));
  std::iota(all.begin(), all.end(), 0);
  Rng rng = MakeRng(c.seed, {kGradientTag});
  const Batch b = Gather(data, SampleBatch(all, m, rng));
  const Tensor g = model.PerExampleGradients(b.images, b.labels);
  const RowMatrix gm = Eigen::Map<const RowMatrix>(g.data().data(), m, model.num_params());
  const MomentConstants k = EstimateConstants(gm, c.bounds.c_tilde, c.bounds.eigen_threshold);
  for (const std::string& w : k.warnings) {
    const std::string msg = "bounds: " + w;
    if (std::find(warnings->begin(), warnings->end(), msg) == warnings->end()) warnings->push_back(msg);
  }
  in.d_star = c.bounds.d_star > 0 ? c.bounds.d_star : k.d_star;
  in.c0 = c.bounds.c0 >= 0 ? c.bounds.c0 : k.c0;
  in.h_g = k.h_g;
  in.logdet = k.logdet_sigma;
  return in;
}

// Per-round bound text for one cell; empty where no closed form applies.
void FillBounds(const ExperimentConfig& c, const BoundInputs& in, int64_t n, int64_t b,
                double rounds_factor, ReportRow* row) {
  row->d_star = in.d_star;
  if (c.fl.protocol != Protocol::kFedSgd) return;
  if (n < 2 || in.d_star < 1) {
    row->bound_case1_bits = "undefined";
    if (c.bounds.sigma > 0) row->bound_case2_bits = "undefined";
    return;
  }
  row->bound_case1_bits = FormatDouble(rounds_factor * PerRoundCase1(n, b, in.d_star, in.c0));
  if (c.bounds.sigma > 0) {
    row->bound_case2_bits = FormatDouble(
        rounds_factor * PerRoundCase2(n, b, in.d_star, c.bounds.sigma, in.h_g, in.logdet));
  }
}

void FillEstimate(const LeakageEstimate& e, ReportRow* row) {
  row->mi_bits = e.mi_bits;
  row->mi_normalized = e.normalized;
  row->ci_low = e.ci_low;
  row->ci_high = e.ci_high;
}

// Projects x and z on a shared basis: the top principal directions of x, or a
// seeded random matrix.
SampleSet Project(const ExperimentConfig& c, const SampleSet& raw, bool orthogonal) {
  const int64_t p = c.mi.projection_dim;
  if (p == 0) return raw;
  Eigen::MatrixXd basis;
  if (c.mi.projection == "pca") {
    const CovarianceSpectrum s = CovarianceEigen(raw.x, true);
    if (s.directions.cols() < p) throw NumericalError("too few samples for the PCA projection");
    basis = s.directions.leftCols(p);
  } else {
    basis = ProjectionMatrix(raw.x.cols(), p, DeriveSeed(c.seed, {kProjectionTag}), orthogonal);
  }
  return {raw.x * basis, raw.z * basis};
}

std::vector<int> OrDefault(const std::vector<int>& v, int fallback) {
  return v.empty() ? std::vector<int>{fallback} : v;
}

CommandOutput PerRoundLeakage(const ExperimentConfig& c, const ExperimentData& data) {
  CommandOutput out;
  if (c.sweep.num_users.empty() && c.sweep.batch_sizes.empty()) {
    out.warnings.push_back("leakage: sweep.num_users and sweep.batch_sizes are empty; nothing to do");
    return out;
  }
  const Model initial = InitialModel(c, data.train);
  const std::vector<int> ns = OrDefault(c.sweep.num_users, c.fl.num_users);
  const std::vector<int> bs = OrDefault(c.sweep.batch_sizes, c.fl.batch_size);
  const double entropy = data.train.entropy_bits;
  for (int n : ns) {
    for (int b : bs) {
      ReportRow base = BaseRow(c, "leakage");
      base.num_users = n;
      base.batch_size = b;
      base.d = initial.num_params();
      const FlConfig f = CellFl(c, n, b);
      base.clients_per_round = f.participants();
      const Partition part = MakePartition(c, data.train, n);
      FlSimulator sim(f, data.train, part, initial);
      for (int t = 0; t < c.mi.train_rounds; ++t) sim.Apply(sim.RunRound(0));
      const int64_t local = static_cast<int64_t>(part.user_indices[0].size());
      const double denom = LeakageDenominatorBits(c.fl.protocol, b, local, entropy);
      std::vector<double> per_round, bound_case1, bound_case2;
      for (int r = 0; r < c.mi.measure_rounds; ++r) {
        ReportRow row = base;
        row.round = sim.round();
        const BoundInputs bounds = EstimateBoundInputs(c, sim.model(), data.train, &out.warnings);
        FillBounds(c, bounds, f.participants(), b, 1.0, &row);
        if (f.participants() < 2) {
          row.note = "single participant: the aggregate is the update itself";
          out.rows.push_back(row);
          break;
        }
        SampleSet samples;
        if (c.mi.projection == "random" && c.mi.projection_dim > 0) {
          samples = CollectRoundSamples(sim, 0, c.mi.samples, c.mi.projection_dim,
                                        DeriveSeed(c.seed, {kProjectionTag}));
        } else {
          samples = Project(c, CollectRoundSamples(sim, 0, c.mi.samples, 0, 0), false);
        }
        const LeakageEstimate e =
            EstimateRoundLeakage(samples, MineFor(c), denom, c.mi.repetitions, c.jobs);
        FillEstimate(e, &row);
        per_round.push_back(e.mi_bits);
        if (!row.bound_case1_bits.empty()) bound_case1.push_back(std::stod(row.bound_case1_bits));
        if (!row.bound_case2_bits.empty()) bound_case2.push_back(std::stod(row.bound_case2_bits));
        out.rows.push_back(row);
        if (r + 1 < c.mi.measure_rounds) sim.Apply(sim.RunRound(0));
      }
      if (c.mi.measure_rounds < 2 || per_round.empty()) continue;
      // Mean over the measured rounds, with a CI across rounds.
      ReportRow mean = base;
      mean.mi_bits = Mean(per_round);
      mean.mi_normalized = *mean.mi_bits / denom;
      std::tie(mean.ci_low, mean.ci_high) = StudentCi95(per_round);
      if (!bound_case1.empty()) mean.bound_case1_bits = FormatDouble(Mean(bound_case1));
      if (!bound_case2.empty()) mean.bound_case2_bits = FormatDouble(Mean(bound_case2));
      mean.d_star = out.rows.back().d_star;
      mean.note = fmt::format("mean_over_rounds={}", per_round.size());
      out.rows.push_back(mean);
    }
  }
  return out;
}

CommandOutput AccumulativeLeakage(const ExperimentConfig& c, const ExperimentData& data) {
  CommandOutput out;
  if (c.sweep.rounds.empty()) {
    out.warnings.push_back("leakage: sweep.rounds is empty; nothing to accumulate");
    return out;
  }
  const Model initial = InitialModel(c, data.train);
  const BoundInputs bounds = EstimateBoundInputs(c, initial, data.train, &out.warnings);
  for (int t : c.sweep.rounds) {
    AccumulativeSetup s{initial, CellFl(c, c.fl.num_users, c.fl.batch_size)};
    s.fl.rounds = t;
    s.fl.dp.reset();
    s.local_size = c.mi.local_size;
    s.k = c.mi.samples;
    s.encoding = ParseEncoding(c.mi.encoding);
    s.projection_dim = c.mi.projection_dim;
    s.projection_seed = DeriveSeed(c.seed, {kProjectionTag});
    const LeakageEstimate e =
        EstimateAccumulative(s, data.train, MineFor(c), c.mi.repetitions, c.jobs);
    ReportRow row = BaseRow(c, "leakage");
    row.rounds = t;
    row.clients_per_round = s.fl.participants();
    row.d = initial.num_params();
    FillEstimate(e, &row);
    FillBounds(c, bounds, s.fl.participants(), c.fl.batch_size, t, &row);
    row.note = fmt::format("accumulative;local_size={};encoding={}", c.mi.local_size,
                           c.mi.encoding);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

CommandOutput CmdTrain(const ExperimentConfig& c, const std::string&) {
  c.Validate();
  const ExperimentData data = LoadExperimentData(c);
  const Model initial = InitialModel(c, data.train);
  const FlConfig f = CellFl(c, c.fl.num_users, c.fl.batch_size);
  const Partition part = MakePartition(c, data.train, f.num_users);
  CommandOutput out;
  const Dataset& eval = data.test.size() > 0 ? data.test : data.train;
  if (data.test.size() == 0) out.warnings.push_back("train: no held-out data; accuracy is on the training pool");
  const std::vector<RoundLog> logs = Train(f, data.train, part, initial, &eval);
  for (const RoundLog& log : logs) {
    ReportRow row = BaseRow(c, "train");
    row.round = log.round + 1;
    row.rounds = f.rounds;
    row.clients_per_round = f.participants();
    row.d = initial.num_params();
    row.accuracy = log.accuracy;
    if (c.dp) {
      row.epsilon = c.dp->epsilon;
      row.sigma_dp = c.dp->sigma();
    }
    if (log.clipped > 0) row.note = fmt::format("quantization_clips={}", log.clipped);
    out.rows.push_back(row);
  }
  return out;
}

CommandOutput CmdLeakage(const ExperimentConfig& c, const std::string&) {
  c.Validate();
  const ExperimentData data = LoadExperimentData(c);
  return c.mi.mode == "accumulative" ? AccumulativeLeakage(c, data) : PerRoundLeakage(c, data);
}

CommandOutput CmdBounds(const ExperimentConfig& c, const std::string&) {
  c.Validate();
  CommandOutput out;
  if (c.sweep.num_users.empty() && c.sweep.batch_sizes.empty() && c.sweep.rounds.empty()) {
    out.warnings.push_back("bounds: sweep lists are empty; nothing to do");
    return out;
  }
  BoundInputs in;
  int64_t d = 0;
  if (c.bounds.d_star > 0 && c.bounds.c0 >= 0) {
    in = EstimateBoundInputs(c, Model{}, Dataset{}, &out.warnings);
  } else {
    const ExperimentData data = LoadExperimentData(c);
    const Model initial = InitialModel(c, data.train);
    d = initial.num_params();
    in = EstimateBoundInputs(c, initial, data.train, &out.warnings);
  }
  for (int n : OrDefault(c.sweep.num_users, c.fl.num_users)) {
    for (int b : OrDefault(c.sweep.batch_sizes, c.fl.batch_size)) {
      for (int t : OrDefault(c.sweep.rounds, c.fl.rounds)) {
        ReportRow row = BaseRow(c, "bounds");
        row.num_users = n;
        row.batch_size = b;
        row.rounds = t;
        if (d > 0) row.d = d;
        row.d_star = in.d_star;
        const int k = c.fl.clients_per_round > 0 ? c.fl.clients_per_round : n;
        row.clients_per_round = k;
        if (c.fl.protocol != Protocol::kFedSgd) {
          row.note = "no closed-form bound for this protocol";
        } else if (n < 2 || k < 2) {
          row.bound_case1_bits = "undefined";
          if (c.bounds.sigma > 0) row.bound_case2_bits = "undefined";
        } else {
          BoundSpec s;
          s.n = n;
          s.batch = b;
          s.d_star = in.d_star;
          s.rounds = t;
          s.c0 = in.c0;
          s.clients_per_round = k == n ? 0 : k;
          const BoundReport r = EvaluateBound(s);
          row.bound_case1_bits = FormatDouble(r.participation * r.case1);
          if (c.bounds.sigma > 0) {
            row.bound_case2_bits = FormatDouble(
                r.participation *
                PerRoundCase2(k, b, in.d_star, c.bounds.sigma, in.h_g, in.logdet));
          }
        }
        out.rows.push_back(row);
      }
    }
  }
  return out;
}

CommandOutput CmdAttack(const ExperimentConfig& c, const std::string& out_dir) {
  c.Validate();
  CommandOutput out;
  if (c.sweep.num_users.empty()) {
    out.warnings.push_back("attack: sweep.num_users is empty; nothing to do");
    return out;
  }
  const ExperimentData data = LoadExperimentData(c);
  const Model initial = InitialModel(c, data.train);
  DlgConfig dlg;
  dlg.iterations = c.attack.iterations;
  dlg.learning_rate = c.attack.learning_rate;
  const std::vector<int>& ns = c.sweep.num_users;
  const int seeds = c.attack.seeds;
  std::vector<ReportRow> rows(ns.size() * static_cast<size_t>(seeds));
  const Shape& shape = data.train.sample_shape();
  const bool images = c.attack.dump_images && !out_dir.empty() && shape.size() == 3 &&
                      (shape[0] == 1 || shape[0] == 3);
  ParallelFor(static_cast<int64_t>(rows.size()), c.jobs, [&](int64_t cell) {
    const int n = ns[static_cast<size_t>(cell / seeds)];
    const int s = static_cast<int>(cell % seeds);
    DlgTrial trial{n, c.attack.batch,
                   DeriveSeed(c.seed, {kAttackTag, static_cast<uint64_t>(n),
                                       static_cast<uint64_t>(s)})};
    Tensor originals;
    const ReconstructionResult r = RunDlgTrial(initial, data.train, trial, dlg, &originals);
    ReportRow row = BaseRow(c, "attack");
    row.protocol = ProtocolName(Protocol::kFedSgd);
    row.num_users = n;
    row.batch_size = c.attack.batch;
    row.d = initial.num_params();
    row.psnr_mean = MeanPsnr(r);
    row.seed = trial.seed;
    row.note = fmt::format("trial={};iterations={};loss={}", s, r.iterations, FormatDouble(r.loss));
    if (images) {
      const std::string stem = fmt::format("{}/attack/N{}_trial{}", out_dir, n, s);
      std::filesystem::create_directories(std::filesystem::path(stem).parent_path());
      const int64_t per = NumElements(shape);
      for (int64_t i = 0; i < c.attack.batch; ++i) {
        const auto recon = r.images.data().subspan(static_cast<size_t>(i * per), static_cast<size_t>(per));
        const int j = r.matched[static_cast<size_t>(i)];
        const auto orig = originals.data().subspan(static_cast<size_t>(j * per), static_cast<size_t>(per));
        WritePnm(fmt::format("{}_recon{}.{}", stem, i, shape[0] == 1 ? "pgm" : "ppm"), recon, shape);
        WritePnm(fmt::format("{}_orig{}.{}", stem, i, shape[0] == 1 ? "pgm" : "ppm"), orig, shape);
        WriteRawF64(fmt::format("{}_recon{}.f64", stem, i), recon);
      }
    }
    rows[static_cast<size_t>(cell)] = std::move(row);
  });
  out.rows = std::move(rows);
  return out;
}

CommandOutput CmdDpSweep(const ExperimentConfig& c, const std::string&) {
  c.Validate();
  CommandOutput out;
  if (c.sweep.epsilons.empty()) {
    out.warnings.push_back("dp-sweep: sweep.epsilons is empty; nothing to do");
    return out;
  }
  const ExperimentData data = LoadExperimentData(c);
  const Model initial = InitialModel(c, data.train);
  const DpParams base = c.dp.value_or(DpParams{});
  // Noise levels are nested: each larger sigma adds an independent increment
  // to the previous level's noise, sample by sample.
  std::vector<size_t> order(c.sweep.epsilons.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return c.sweep.epsilons[a] > c.sweep.epsilons[b];
  });
  const Dataset& eval = data.test.size() > 0 ? data.test : data.train;
  if (data.test.size() == 0) out.warnings.push_back("dp-sweep: no held-out data; accuracy is on the training pool");

  for (int n : OrDefault(c.sweep.num_users, c.fl.num_users)) {
    const Partition part = MakePartition(c, data.train, n);
    FlConfig f = CellFl(c, n, c.fl.batch_size);
    f.dp.reset();
    FlSimulator sim(f, data.train, part, initial);
    for (int t = 0; t < c.mi.train_rounds; ++t) sim.Apply(sim.RunRound(0));
    const int k = c.mi.samples;
    const int64_t d = initial.num_params();
    SampleSet raw{RowMatrix(k, d), RowMatrix(k, d)};
    for (int i = 0; i < k; ++i) {
      const RoundLog log = sim.RunRound(k - 1 - i);
      const auto it = std::find_if(log.updates.begin(), log.updates.end(),
                                   [](const ModelUpdate& u) { return u.user_id == 0; });
      if (it == log.updates.end()) throw InvalidArgument("user 0 did not take part in the round");
      raw.x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(it->values.data(), d);
      const std::vector<double> clipped = ClipToNorm(log.aggregate, base.clip_norm);
      raw.z.row(i) = Eigen::Map<const Eigen::RowVectorXd>(clipped.data(), d);
    }
    // Orthonormal bases keep projected Gaussian noise i.i.d. with the same sigma.
    const SampleSet proj = Project(c, raw, true);
    const int64_t p = proj.z.cols();
    const double denom = LeakageDenominatorBits(Protocol::kFedSgd, c.fl.batch_size,
                                                static_cast<int64_t>(part.user_indices[0].size()),
                                                data.train.entropy_bits);
    RowMatrix noise = RowMatrix::Zero(k, p);
    double prev_var = 0.0;
    std::vector<ReportRow> rows(c.sweep.epsilons.size());
    for (size_t level = 0; level < order.size(); ++level) {
      const double eps = c.sweep.epsilons[order[level]];
      DpParams dp = base;
      dp.epsilon = eps;
      dp.Validate();
      const double sigma = dp.sigma();
      const double step = std::sqrt(std::max(0.0, sigma * sigma - prev_var));
      prev_var = std::max(prev_var, sigma * sigma);
      for (int i = 0; i < k; ++i) {
        Rng rng = MakeRng(c.seed, {kDpNoiseTag, static_cast<uint64_t>(n),
                                   static_cast<uint64_t>(level), static_cast<uint64_t>(i)});
        for (int64_t j = 0; j < p; ++j) noise(i, j) += step * StandardNormal(rng);
      }
      const SampleSet noisy{proj.x, proj.z + noise};
      const LeakageEstimate e =
          EstimateRoundLeakage(noisy, MineFor(c), denom, c.mi.repetitions, c.jobs);

      FlConfig tf = CellFl(c, n, c.fl.batch_size);
      tf.dp = dp;
      const std::vector<RoundLog> logs = Train(tf, data.train, part, initial, &eval);

      ReportRow row = BaseRow(c, "dp-sweep");
      row.num_users = n;
      row.clients_per_round = f.participants();
      row.rounds = tf.rounds;
      row.round = c.mi.train_rounds;
      row.d = d;
      FillEstimate(e, &row);
      row.accuracy = logs.empty() ? Evaluate(initial, eval) : logs.back().accuracy;
      row.epsilon = eps;
      row.sigma_dp = sigma;
      row.note = fmt::format("delta={};clip_norm={}", FormatDouble(dp.delta),
                             FormatDouble(dp.clip_norm));
      rows[order[level]] = std::move(row);
    }
    for (ReportRow& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

CommandOutput CmdCounterexample(const ExperimentConfig& c, const std::string&) {
  c.Validate();
  CounterexampleConfig cc;
  cc.seed = c.seed;
  const CounterexampleReport rep = SparsityCounterexample(cc);
  CommandOutput out;
  const char* names[2] = {"x4", "x4'"};
  auto add = [&](const std::string& table, double acc,
                 const std::array<std::array<int, 2>, 2>& counts) {
    ReportRow row;
    row.experiment = c.id;
    row.command = "demo-counterexample";
    row.seed = c.seed;
    row.accuracy = acc;
    row.note = fmt::format("{};trials={};distinguishing_coordinate={}", table, rep.trials,
                           rep.distinguishing_coordinate);
    out.rows.push_back(row);
    for (int t = 0; t < 2; ++t) {
      for (int d = 0; d < 2; ++d) {
        ReportRow cell = row;
        cell.accuracy.reset();
        cell.note = fmt::format("{};truth={};decision={};count={}", table, names[t], names[d],
                                counts[static_cast<size_t>(t)][static_cast<size_t>(d)]);
        out.rows.push_back(cell);
      }
    }
  };
  add("outside_span", rep.accuracy, rep.table);
  add("inside_span_control", rep.control_accuracy, rep.control_table);
  return out;
}

std::vector<std::string> CommandNames() {
  return {"train", "leakage", "bounds", "attack", "dp-sweep", "demo-counterexample"};
}

CommandOutput RunCommand(const std::string& name, const ExperimentConfig& config,
                         const std::string& out_dir) {
  CommandOutput out;
  if (name == "train") {
    out = CmdTrain(config, out_dir);
  } else if (name == "leakage") {
    out = CmdLeakage(config, out_dir);
  } else if (name == "bounds") {
    out = CmdBounds(config, out_dir);
  } else if (name == "attack") {
    out = CmdAttack(config, out_dir);
  } else if (name == "dp-sweep") {
    out = CmdDpSweep(config, out_dir);
  } else if (name == "demo-counterexample") {
    out = CmdCounterexample(config, out_dir);
  } else {
    throw ConfigError(fmt::format("unknown command '{}'", name));
  }
  if (!out_dir.empty()) WriteTextFile(fmt::format("{}/{}.csv", out_dir, name), ToCsv(out.rows));
  return out;
}

}  // namespace fllab
