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

#include "fllab/harness/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fllab/data/formats.h"
#include "fllab/mi/leakage.h"
#include "fllab/model/model.h"
#include "fllab/secagg/secure_agg.h"
#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& raw, const std::string& field) {
  const std::string s = Trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", field, raw));
  }
  return v;
}

bool ParseBool(const std::string& raw, const std::string& field) {
  const std::string s = Trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", field, raw));
}

template <typename T>
std::vector<T> ParseList(const std::string& raw, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (Trim(item).empty()) {
      if (out.empty() && Trim(raw).empty()) break;
      throw ConfigError(fmt::format("{}: empty list entry in '{}'", field, raw));
    }
    out.push_back(ParseNumber<T>(item, field));
  }
  return out;
}

template <typename T>
std::string FormatList(const std::vector<T>& v) {
  return fmt::format("{}", fmt::join(v, ", "));
}

// One configurable key: how to print it and how to set it from text.
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

#define FLLAB_NUM(SEC, KEY, EXPR, TYPE)                                                 \
  Field {                                                                               \
    SEC, KEY, [](const ExperimentConfig& c) { return fmt::format("{}", c.EXPR); },      \
        [](ExperimentConfig& c, const std::string& v, const std::string& f) {           \
          c.EXPR = ParseNumber<TYPE>(v, f);                                             \
        }                                                                               \
  }
#define FLLAB_STR(SEC, KEY, EXPR)                                                                 \
  Field {                                                                                         \
    SEC, KEY, [](const ExperimentConfig& c) { return c.EXPR; },                                   \
        [](ExperimentConfig& c, const std::string& v, const std::string&) { c.EXPR = Trim(v); } \
  }
#define FLLAB_BOOL(SEC, KEY, EXPR)                                                              \
  Field {                                                                                       \
    SEC, KEY, [](const ExperimentConfig& c) { return std::string(c.EXPR ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v, const std::string& f) {                   \
          c.EXPR = ParseBool(v, f);                                                             \
        }                                                                                       \
  }
#define FLLAB_LIST(SEC, KEY, EXPR, TYPE)                                           \
  Field {                                                                          \
    SEC, KEY, [](const ExperimentConfig& c) { return FormatList(c.EXPR); },        \
        [](ExperimentConfig& c, const std::string& v, const std::string& f) {      \
          c.EXPR = ParseList<TYPE>(v, f);                                          \
        }                                                                          \
  }

// DP values are staged here while parsing and folded into the optional.
struct DpStage {
  bool enabled = false;
  DpParams params;
};

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      FLLAB_STR("experiment", "id", id),
      FLLAB_NUM("experiment", "seed", seed, uint64_t),
      FLLAB_NUM("experiment", "jobs", jobs, int),
      FLLAB_STR("experiment", "out_dir", out_dir),

      FLLAB_STR("data", "kind", data.kind),
      FLLAB_STR("data", "path", data.path),
      FLLAB_NUM("data", "train_size", data.train_size, int64_t),
      FLLAB_NUM("data", "test_size", data.test_size, int64_t),
      FLLAB_NUM("data", "synthetic_dim", data.synthetic_dim, int),
      FLLAB_NUM("data", "synthetic_samples", data.synthetic_samples, int64_t),
      FLLAB_NUM("data", "synthetic_classes", data.synthetic_classes, int),
      FLLAB_NUM("data", "synthetic_separation", data.synthetic_separation, double),
      FLLAB_NUM("data", "entropy_bits", data.entropy_bits, double),

      FLLAB_STR("model", "arch", model),

      Field{"fl", "protocol", [](const ExperimentConfig& c) { return ProtocolName(c.fl.protocol); },
            [](ExperimentConfig& c, const std::string& v, const std::string&) {
              c.fl.protocol = ParseProtocol(Trim(v));
            }},
      FLLAB_NUM("fl", "num_users", fl.num_users, int),
      FLLAB_NUM("fl", "clients_per_round", fl.clients_per_round, int),
      FLLAB_NUM("fl", "batch_size", fl.batch_size, int),
      FLLAB_NUM("fl", "local_epochs", fl.local_epochs, int),
      FLLAB_NUM("fl", "rounds", fl.rounds, int),
      FLLAB_NUM("fl", "learning_rate", fl.learning_rate, double),
      FLLAB_NUM("fl", "prox_mu", fl.prox_mu, double),
      FLLAB_NUM("fl", "alpha", alpha, double),
      FLLAB_BOOL("fl", "secure_aggregation", fl.secure_aggregation),
      FLLAB_NUM("fl", "quant_scale", fl.quant_scale, double),
      FLLAB_NUM("fl", "dropout_prob", fl.dropout_prob, double),

      Field{"dp", "enabled",
            [](const ExperimentConfig& c) { return std::string(c.dp ? "true" : "false"); },
            nullptr},
      Field{"dp", "clip_norm",
            [](const ExperimentConfig& c) { return fmt::format("{}", c.dp.value_or(DpParams{}).clip_norm); },
            nullptr},
      Field{"dp", "epsilon",
            [](const ExperimentConfig& c) { return fmt::format("{}", c.dp.value_or(DpParams{}).epsilon); },
            nullptr},
      Field{"dp", "delta",
            [](const ExperimentConfig& c) { return fmt::format("{}", c.dp.value_or(DpParams{}).delta); },
            nullptr},

      FLLAB_STR("mi", "mode", mi.mode),
      FLLAB_NUM("mi", "samples", mi.samples, int),
      FLLAB_NUM("mi", "repetitions", mi.repetitions, int),
      FLLAB_NUM("mi", "projection_dim", mi.projection_dim, int64_t),
      FLLAB_STR("mi", "projection", mi.projection),
      FLLAB_STR("mi", "encoding", mi.encoding),
      FLLAB_NUM("mi", "local_size", mi.local_size, int64_t),
      FLLAB_NUM("mi", "train_rounds", mi.train_rounds, int),
      FLLAB_NUM("mi", "measure_rounds", mi.measure_rounds, int),
      FLLAB_LIST("mi", "hidden", mi.mine.hidden, int),
      FLLAB_NUM("mi", "iterations", mi.mine.iterations, int),
      FLLAB_NUM("mi", "learning_rate", mi.mine.learning_rate, double),
      FLLAB_NUM("mi", "ema_decay", mi.mine.ema_decay, double),
      FLLAB_NUM("mi", "weight_decay", mi.mine.weight_decay, double),
      FLLAB_NUM("mi", "eval_shuffles", mi.mine.eval_shuffles, int),

      FLLAB_NUM("bounds", "c_tilde", bounds.c_tilde, double),
      FLLAB_NUM("bounds", "eigen_threshold", bounds.eigen_threshold, double),
      FLLAB_NUM("bounds", "sigma", bounds.sigma, double),
      FLLAB_NUM("bounds", "gradient_samples", bounds.gradient_samples, int),
      FLLAB_NUM("bounds", "d_star", bounds.d_star, int64_t),
      FLLAB_NUM("bounds", "c0", bounds.c0, double),

      FLLAB_LIST("sweep", "num_users", sweep.num_users, int),
      FLLAB_LIST("sweep", "batch_sizes", sweep.batch_sizes, int),
      FLLAB_LIST("sweep", "epsilons", sweep.epsilons, double),
      FLLAB_LIST("sweep", "rounds", sweep.rounds, int),

      FLLAB_NUM("attack", "iterations", attack.iterations, int),
      FLLAB_NUM("attack", "learning_rate", attack.learning_rate, double),
      FLLAB_NUM("attack", "seeds", attack.seeds, int),
      FLLAB_NUM("attack", "batch", attack.batch, int64_t),
      FLLAB_BOOL("attack", "dump_images", attack.dump_images),
  };
  return fields;
}

void SetDp(DpStage& dp, const std::string& key, const std::string& v, const std::string& f) {
  if (key == "enabled") dp.enabled = ParseBool(v, f);
  if (key == "clip_norm") dp.params.clip_norm = ParseNumber<double>(v, f);
  if (key == "epsilon") dp.params.epsilon = ParseNumber<double>(v, f);
  if (key == "delta") dp.params.delta = ParseNumber<double>(v, f);
}

void CheckPartition(int64_t pool, int n, int b, Protocol protocol) {
  if (n < 1) throw ConfigError(fmt::format("num_users must be >= 1, got {}", n));
  const int64_t per_user = pool / n;
  if (per_user < 1) {
    throw ConfigError(fmt::format("train_size {} cannot be split across {} users", pool, n));
  }
  if (protocol == Protocol::kFedSgd && b > per_user) {
    throw ConfigError(fmt::format(
        "batch_size {} exceeds the {} samples each of {} users holds", b, per_user, n));
  }
}

Dataset Concat(const std::vector<Dataset>& parts) {
  if (parts.size() == 1) return parts[0];
  Dataset out;
  out.num_classes = parts[0].num_classes;
  out.entropy_bits = parts[0].entropy_bits;
  Shape shape = parts[0].images.shape();
  shape[0] = 0;
  std::vector<double> values;
  for (const Dataset& p : parts) {
    shape[0] += p.size();
    values.insert(values.end(), p.images.data().begin(), p.images.data().end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.images = Tensor(shape, std::move(values));
  return out;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (jobs < 1) throw ConfigError(fmt::format("experiment.jobs must be >= 1, got {}", jobs));
  if (id.empty()) throw ConfigError("experiment.id must not be empty");
  if (data.kind != "mnist" && data.kind != "cifar10" && data.kind != "synthetic") {
    throw ConfigError(fmt::format("data.kind must be mnist, cifar10 or synthetic, got '{}'", data.kind));
  }
  if (data.kind == "cifar10" && data.path.empty()) throw ConfigError("data.path is required for cifar10");
  if (data.train_size < 2) throw ConfigError("data.train_size must be >= 2");
  if (data.test_size < 0) throw ConfigError("data.test_size must be >= 0");
  if (data.entropy_bits < 0) throw ConfigError("data.entropy_bits must be >= 0");
  if (data.kind == "synthetic") {
    if (data.synthetic_dim < 1 || data.synthetic_classes < 2) {
      throw ConfigError("data.synthetic_dim must be >= 1 and synthetic_classes >= 2");
    }
    if (data.synthetic_samples < data.train_size) {
      throw ConfigError("data.synthetic_samples must be >= data.train_size");
    }
  }
  try {
    ParseArchitecture(model);
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("model.arch: {}", e.what()));
  }
  FlConfig base = fl;
  base.dp = dp;
  base.Validate();
  if (!(alpha > 0)) throw ConfigError(fmt::format("fl.alpha must be > 0 or inf, got {}", alpha));

  std::vector<int> ns = sweep.num_users;
  ns.push_back(fl.num_users);
  std::vector<int> bs = sweep.batch_sizes;
  bs.push_back(fl.batch_size);
  for (int n : ns) {
    for (int b : bs) {
      if (b < 1) throw ConfigError(fmt::format("sweep.batch_sizes entries must be >= 1, got {}", b));
      CheckPartition(data.train_size, n, b, fl.protocol);
    }
    if (fl.secure_aggregation && n >= 2) QuantSpec::ForUsers(n, fl.quant_scale).CheckNoWrap(n);
  }
  for (double e : sweep.epsilons) {
    if (!(e > 0)) throw ConfigError(fmt::format("sweep.epsilons entries must be > 0, got {}", e));
  }
  for (int t : sweep.rounds) {
    if (t < 1) throw ConfigError(fmt::format("sweep.rounds entries must be >= 1, got {}", t));
  }

  if (mi.mode != "per_round" && mi.mode != "accumulative") {
    throw ConfigError(fmt::format("mi.mode must be per_round or accumulative, got '{}'", mi.mode));
  }
  if (fl.clients_per_round > 0) {
    for (int n : sweep.num_users) {
      if (fl.clients_per_round > n) {
        throw ConfigError(fmt::format("fl.clients_per_round {} exceeds sweep.num_users entry {}",
                                      fl.clients_per_round, n));
      }
    }
  }
  if (mi.mode == "accumulative" && static_cast<int64_t>(fl.num_users) * mi.local_size > data.train_size) {
    throw ConfigError(fmt::format("fl.num_users x mi.local_size = {} exceeds data.train_size {}",
                                  static_cast<int64_t>(fl.num_users) * mi.local_size, data.train_size));
  }
  if (mi.samples < 2) throw ConfigError("mi.samples must be >= 2");
  if (mi.repetitions < 2) throw ConfigError("mi.repetitions must be >= 2");
  if (mi.projection_dim < 0) throw ConfigError("mi.projection_dim must be >= 0");
  if (mi.projection != "random" && mi.projection != "pca") {
    throw ConfigError(fmt::format("mi.projection must be random or pca, got '{}'", mi.projection));
  }
  ParseEncoding(mi.encoding);
  if (mi.local_size < 1) throw ConfigError("mi.local_size must be >= 1");
  if (mi.train_rounds < 0) throw ConfigError("mi.train_rounds must be >= 0");
  if (mi.measure_rounds < 1) throw ConfigError("mi.measure_rounds must be >= 1");
  mi.mine.Validate();

  if (!(bounds.c_tilde > 0)) throw ConfigError("bounds.c_tilde must be > 0");
  if (!(bounds.eigen_threshold > 0 && bounds.eigen_threshold < 1)) {
    throw ConfigError("bounds.eigen_threshold must lie in (0, 1)");
  }
  if (bounds.sigma < 0) throw ConfigError("bounds.sigma must be >= 0");
  if (bounds.gradient_samples < 2) throw ConfigError("bounds.gradient_samples must be >= 2");
  if (bounds.d_star < 0) throw ConfigError("bounds.d_star must be >= 0");

  if (attack.iterations < 0) throw ConfigError("attack.iterations must be >= 0");
  if (!(attack.learning_rate > 0)) throw ConfigError("attack.learning_rate must be > 0");
  if (attack.seeds < 1) throw ConfigError("attack.seeds must be >= 1");
  if (attack.batch < 1) throw ConfigError("attack.batch must be >= 1");
}

ExperimentConfig ParseConfig(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax error on line {}: {}", e.line(), e.message()));
  }
  ExperimentConfig c;
  DpStage dp;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("key '{}' must belong to a section", section));
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto& fields = Fields();
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields.end()) throw ConfigError(fmt::format("unknown config key '{}'", name));
      if (section == "dp") {
        SetDp(dp, key, value.data(), name);
      } else {
        it->set(c, value.data(), name);
      }
    }
  }
  if (dp.enabled) c.dp = dp.params;
  c.fl.seed = c.seed;
  c.fl.jobs = c.jobs;
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string SerializeConfig(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

ExperimentData LoadExperimentData(const ExperimentConfig& config) {
  config.Validate();
  const DataSection& d = config.data;
  Dataset all;
  if (d.kind == "mnist") {
    all = LoadBundledMnist(d.path);
  } else if (d.kind == "cifar10") {
    std::vector<Dataset> parts;
    std::stringstream ss(d.path);
    std::string file;
    while (std::getline(ss, file, ',')) parts.push_back(ParseCifar10(ReadFileBytes(Trim(file))));
    all = Concat(parts);
  } else {
    all = SynthClassification(d.synthetic_dim, d.synthetic_samples, d.synthetic_classes,
                              d.synthetic_separation, d.entropy_bits > 0 ? d.entropy_bits : 1.0,
                              DeriveSeed(config.seed, {0x5e7}));
  }
  if (d.entropy_bits > 0) all.entropy_bits = d.entropy_bits;
  if (d.train_size > all.size()) {
    throw ConfigError(fmt::format("data.train_size {} exceeds the {} loaded samples", d.train_size,
                                  all.size()));
  }
  std::vector<int64_t> all_idx(static_cast<size_t>(all.size()));
  std::iota(all_idx.begin(), all_idx.end(), 0);
  Rng rng = MakeRng(config.seed, {0xda7a});
  const std::vector<int64_t> order = SampleBatch(all_idx, all.size(), rng);
  const int64_t rest = all.size() - d.train_size;
  const int64_t test = d.test_size > 0 ? std::min(d.test_size, rest) : rest;
  ExperimentData out;
  out.train = all.Subset(std::span(order).subspan(0, static_cast<size_t>(d.train_size)));
  if (test > 0) {
    out.test = all.Subset(
        std::span(order).subspan(static_cast<size_t>(d.train_size), static_cast<size_t>(test)));
  }
  return out;
}

}  // namespace fllab
