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

#include "fllab/harness/report.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "fllab/util/error.h"

namespace fllab {
namespace {

template <typename T>
std::string Cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return FormatDouble(*v);
  } else {
    return fmt::format("{}", *v);
  }
}

}  // namespace

std::vector<std::string> ReportHeader() {
  return {"schema_version", "experiment", "command", "round", "protocol", "N", "K", "B", "E", "T",
          "d", "d_star", "mi_bits", "mi_normalized", "ci_low", "ci_high", "bound_case1_bits",
          "bound_case2_bits", "accuracy", "psnr_mean", "epsilon", "sigma_dp", "seed", "note"};
}

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string FormatDouble(double v) {
  if (!std::isfinite(v)) throw NumericalError(fmt::format("report value {} is not finite", v));
  return fmt::format("{}", v);
}

std::string ToCsv(const std::vector<ReportRow>& rows) {
  std::string out;
  const auto header = ReportHeader();
  for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const ReportRow& r : rows) {
    const std::vector<std::string> cells = {
        fmt::format("{}", kReportSchemaVersion), CsvEscape(r.experiment), CsvEscape(r.command),
        Cell(r.round), CsvEscape(r.protocol), Cell(r.num_users), Cell(r.clients_per_round),
        Cell(r.batch_size), Cell(r.local_epochs), Cell(r.rounds), Cell(r.d), Cell(r.d_star),
        Cell(r.mi_bits), Cell(r.mi_normalized), Cell(r.ci_low), Cell(r.ci_high),
        CsvEscape(r.bound_case1_bits), CsvEscape(r.bound_case2_bits), Cell(r.accuracy),
        Cell(r.psnr_mean), Cell(r.epsilon), Cell(r.sigma_dp), Cell(r.seed), CsvEscape(r.note)};
    for (size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  }
  return out;
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  out << contents;
  if (!out) throw Error(fmt::format("write to {} failed", path));
}

}  // namespace fllab
