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

#include <cstdint>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fllab/adversary/dlg.h"
#include "fllab/adversary/dp.h"
#include "fllab/bounds/bounds.h"
#include "fllab/harness/commands.h"
#include "fllab/harness/config.h"
#include "fllab/harness/report.h"
#include "fllab/mi/mine.h"
#include "fllab/secagg/secure_agg.h"
#include "fllab/util/error.h"
#include "fllab/util/linalg.h"

namespace py = pybind11;

namespace fllab {
namespace {

py::dict Mine(const RowMatrix& x, const RowMatrix& z, std::vector<int> hidden, int iterations,
              double learning_rate, double weight_decay, uint64_t seed) {
  MineConfig c;
  c.hidden = std::move(hidden);
  c.iterations = iterations;
  c.learning_rate = learning_rate;
  c.weight_decay = weight_decay;
  c.seed = seed;
  MineResult r;
  {
    py::gil_scoped_release release;
    r = MineEstimate({x, z}, c);
  }
  py::dict out;
  out["bits"] = r.bits;
  out["nats"] = r.nats;
  out["trace_bits"] = r.trace_bits;
  return out;
}

// Masks every row, drops the users outside `survivors`, and decodes.
std::vector<double> SecureMean(const RowMatrix& updates, const std::vector<int>& survivors,
                               uint64_t seed, uint32_t round, double scale) {
  const int n = static_cast<int>(updates.rows());
  const auto d = static_cast<size_t>(updates.cols());
  const QuantSpec spec = QuantSpec::ForUsers(n, scale);
  const PairwiseSeedTable table = PairwiseSeedTable::Generate(n, seed);
  std::vector<int> everyone(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) everyone[static_cast<size_t>(i)] = i;
  std::vector<MaskedUpdate> received;
  for (int u : survivors) {
    if (u < 0 || u >= n) throw InvalidArgument("survivor id out of range");
    std::vector<int> peers;
    for (int j : everyone) {
      if (j != u) peers.push_back(j);
    }
    const std::vector<double> row(updates.row(u).data(), updates.row(u).data() + d);
    received.push_back(Mask(Quantize(row, spec).q, u, peers, round, table));
  }
  return DecodeAggregate(received, survivors, table, spec).mean;
}

}  // namespace
}  // namespace fllab

PYBIND11_MODULE(_core, m) {
  using namespace fllab;
  m.doc() = "Federated-learning privacy lab: bounds, MINE, secure aggregation, experiments.";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("per_round_case1", [](int64_t n, int64_t b, int64_t d_star, double c0) {
    return PerRoundCase1(n, b, d_star, c0);
  }, py::arg("n"), py::arg("batch"), py::arg("d_star"), py::arg("c0"),
        "Case-1 per-round leakage bound in bits.");
  m.def("per_round_case2",
        [](int64_t n, int64_t b, int64_t d_star, double sigma, double h_g, double logdet) {
          return PerRoundCase2(n, b, d_star, sigma, h_g, logdet);
        },
        py::arg("n"), py::arg("batch"), py::arg("d_star"), py::arg("sigma"), py::arg("h_g"),
        py::arg("logdet_sigma"), "Case-2 per-round leakage bound in bits.");
  m.def("multi_round", &MultiRound, py::arg("per_round"), py::arg("rounds"));
  m.def("user_sampling_bound",
        [](int64_t k, int64_t b, int64_t d_star, double c0, int64_t rounds, int64_t n) {
          return UserSamplingBound(k, b, d_star, c0, rounds, n);
        },
        py::arg("k"), py::arg("batch"), py::arg("d_star"), py::arg("c0"), py::arg("rounds"),
        py::arg("n"));
  m.def("dp_sigma", &DpSigma, py::arg("epsilon"), py::arg("delta"),
        "Gaussian-mechanism noise scale for unit sensitivity.");
  m.def("psnr", [](const std::vector<double>& a, const std::vector<double>& b) {
    return Psnr(a, b).db;
  }, py::arg("original"), py::arg("reconstructed"));

  m.def("mine_estimate", &Mine, py::arg("x"), py::arg("z"),
        py::arg("hidden") = std::vector<int>{100, 100}, py::arg("iterations") = 1000,
        py::arg("learning_rate") = 1e-3, py::arg("weight_decay") = 1e-2, py::arg("seed") = 0,
        "Donsker-Varadhan MI estimate between paired rows of x and z.");

  m.def("secure_mean", &SecureMean, py::arg("updates"), py::arg("survivors"),
        py::arg("seed") = 0, py::arg("round") = 0, py::arg("scale") = 65536.0,
        "Masked, quantized mean of the survivors' rows, decoded by the server.");

  m.def("normalize_config", [](const std::string& text) {
    ExperimentConfig c = ParseConfig(text);
    c.Validate();
    return SerializeConfig(c);
  }, py::arg("text"), "Parses and validates an INI config; returns its canonical form.");
  m.def("command_names", &CommandNames);
  m.def("run_command", [](const std::string& name, const std::string& config_text,
                          const std::string& out_dir) {
    const ExperimentConfig c = ParseConfig(config_text);
    CommandOutput out;
    {
      py::gil_scoped_release release;
      out = RunCommand(name, c, out_dir);
    }
    return py::make_tuple(ToCsv(out.rows), out.warnings);
  }, py::arg("name"), py::arg("config_text"), py::arg("out_dir"),
        "Runs a command, writes <out_dir>/<name>.csv, returns (csv_text, warnings).");
}
