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

// CSV report rows shared by every command.

#ifndef FLLAB_HARNESS_REPORT_H_
#define FLLAB_HARNESS_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fllab {

inline constexpr int kReportSchemaVersion = 1;

struct ReportRow {
  std::string experiment;
  std::string command;
  std::optional<int64_t> round;
  std::string protocol;
  std::optional<int64_t> num_users;
  std::optional<int64_t> clients_per_round;
  std::optional<int64_t> batch_size;
  std::optional<int64_t> local_epochs;
  std::optional<int64_t> rounds;
  std::optional<int64_t> d;
  std::optional<int64_t> d_star;
  std::optional<double> mi_bits;
  std::optional<double> mi_normalized;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  // Bound cells are text so an undefined bound can say so.
  std::string bound_case1_bits;
  std::string bound_case2_bits;
  std::optional<double> accuracy;
  std::optional<double> psnr_mean;
  std::optional<double> epsilon;
  std::optional<double> sigma_dp;
  std::optional<uint64_t> seed;
  std::string note;
};

std::vector<std::string> ReportHeader();

// One field, quoted when it holds a comma, quote or line break.
std::string CsvEscape(const std::string& field);

// Shortest text that reads back to the same double.
std::string FormatDouble(double v);

// Header line plus one line per row, CRLF-free.
std::string ToCsv(const std::vector<ReportRow>& rows);

// Writes `contents` to `path`, creating parent directories.
void WriteTextFile(const std::string& path, const std::string& contents);

}  // namespace fllab

#endif  // FLLAB_HARNESS_REPORT_H_
