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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fllab/harness/commands.h"
#include "fllab/harness/config.h"
#include "fllab/harness/report.h"
#include "fllab/util/error.h"

namespace fllab {
namespace {

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(part);
  return out;
}

ExperimentConfig Small() {
  ExperimentConfig c = ParseConfig(R"(
[experiment]
id = small
seed = 3
[data]
train_size = 200
test_size = 100
[fl]
num_users = 4
batch_size = 10
rounds = 2
learning_rate = 0.5
)");
  return c;
}

std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fllab_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(ConfigTest, SerializeRoundTrip) {
  ExperimentConfig c = Small();
  c.dp = DpParams{};
  c.dp->epsilon = 7.5;
  c.sweep.num_users = {2, 5};
  c.sweep.epsilons = {5, 0.1};
  c.mi.mine.hidden = {32, 16};
  c.alpha = 0.3;
  const ExperimentConfig back = ParseConfig(SerializeConfig(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(SerializeConfig(back), SerializeConfig(c));
}

TEST(ConfigTest, DefaultsSurviveRoundTrip) {
  const ExperimentConfig c = ParseConfig("");
  EXPECT_TRUE(std::isinf(c.alpha));
  EXPECT_FALSE(c.dp.has_value());
  EXPECT_EQ(ParseConfig(SerializeConfig(c)), c);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(ParseConfig("[fl]\nnum_userz = 3\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[fl]\nnum_users = three\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[nosuch]\nx = 1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[fl]\nprotocol = fedfoo\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[sweep]\nnum_users = 2,,3\n"), ConfigError);
}

TEST(ConfigTest, ValidateCrossFields) {
  ExperimentConfig c = Small();
  EXPECT_NO_THROW(c.Validate());
  c.fl.clients_per_round = 5;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.fl.clients_per_round = 3;
  c.sweep.num_users = {4, 2};
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.sweep.num_users = {300};  // fewer samples than users
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.mi.mode = "accumulative";
  c.mi.local_size = 64;  // 4 x 64 > 200
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.mi.measure_rounds = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(ReportTest, CsvEscaping) {
  EXPECT_EQ(CsvEscape("plain"), "plain");
  EXPECT_EQ(CsvEscape("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvEscape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(CsvEscape("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(FormatDouble(std::nan("")), NumericalError);
}

TEST(ReportTest, HeaderAndRowWidth) {
  ReportRow r;
  r.experiment = "e,1";
  r.mi_bits = 0.25;
  r.note = "x";
  const std::string csv = ToCsv({r});
  const auto lines = Split(csv, '\n');
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("schema_version,", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(ReportHeader().front(), "schema_version");
  EXPECT_EQ(lines[1].rfind("1,\"e,1\",", 0), 0u);
}

TEST(CommandTest, BoundsGridFromFixedConstants) {
  ExperimentConfig c = Small();
  c.data.train_size = 4096;  // room for 64 users x batch 64; never loaded
  c.bounds.d_star = 100;
  c.bounds.c0 = 3;
  c.sweep.num_users = {1, 2, 4, 8, 16, 32, 64};
  c.sweep.batch_sizes = {1, 2, 4, 8, 16, 32, 64};
  const CommandOutput out = CmdBounds(c, "");
  ASSERT_EQ(out.rows.size(), 49u);
  for (const ReportRow& r : out.rows) {
    if (*r.num_users == 1) {
      EXPECT_EQ(r.bound_case1_bits, "undefined");
    } else {
      EXPECT_GT(std::stod(r.bound_case1_bits), 0.0);
    }
  }
  // Fixed B: decreasing in N; fixed N: decreasing in B.
  auto at = [&](size_t ni, size_t bi) { return std::stod(out.rows[ni * 7 + bi].bound_case1_bits); };
  for (size_t bi = 0; bi < 7; ++bi) {
    for (size_t ni = 2; ni < 7; ++ni) EXPECT_LT(at(ni, bi), at(ni - 1, bi));
  }
  for (size_t ni = 1; ni < 7; ++ni) {
    for (size_t bi = 1; bi < 7; ++bi) EXPECT_LT(at(ni, bi), at(ni, bi - 1));
  }
}

TEST(CommandTest, BoundsScaleWithRounds) {
  ExperimentConfig c = Small();
  c.bounds.d_star = 10;
  c.bounds.c0 = 2;
  c.sweep.num_users = {4};
  c.sweep.rounds = {1, 2, 4};
  const CommandOutput out = CmdBounds(c, "");
  ASSERT_EQ(out.rows.size(), 3u);
  const double one = std::stod(out.rows[0].bound_case1_bits);
  EXPECT_DOUBLE_EQ(std::stod(out.rows[1].bound_case1_bits), 2 * one);
  EXPECT_DOUBLE_EQ(std::stod(out.rows[2].bound_case1_bits), 4 * one);
}

TEST(CommandTest, EmptySweepsWarn) {
  const ExperimentConfig c = Small();
  EXPECT_TRUE(CmdBounds(c, "").rows.empty());
  EXPECT_FALSE(CmdBounds(c, "").warnings.empty());
  EXPECT_FALSE(CmdAttack(c, "").warnings.empty());
  EXPECT_FALSE(CmdDpSweep(c, "").warnings.empty());
  EXPECT_FALSE(CmdLeakage(c, "").warnings.empty());
}

TEST(CommandTest, TrainOneRowPerRound) {
  ExperimentConfig c = Small();
  c.fl.rounds = 1;
  const CommandOutput one = CmdTrain(c, "");
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(*one.rows[0].round, 1);
  c.fl.rounds = 3;
  const CommandOutput three = CmdTrain(c, "");
  ASSERT_EQ(three.rows.size(), 3u);
  EXPECT_EQ(three.rows[0].accuracy, one.rows[0].accuracy);
  for (const ReportRow& r : three.rows) {
    EXPECT_GE(*r.accuracy, 0.0);
    EXPECT_LE(*r.accuracy, 1.0);
  }
}

TEST(CommandTest, SecureAggregationKeepsAccuracy) {
  ExperimentConfig c = Small();
  c.fl.rounds = 3;
  const CommandOutput plain = CmdTrain(c, "");
  c.fl.secure_aggregation = true;
  const CommandOutput masked = CmdTrain(c, "");
  ASSERT_EQ(plain.rows.size(), masked.rows.size());
  for (size_t i = 0; i < plain.rows.size(); ++i) {
    EXPECT_NEAR(*masked.rows[i].accuracy, *plain.rows[i].accuracy, 0.02);
  }
}

TEST(CommandTest, RunCommandIsDeterministic) {
  ExperimentConfig c = Small();
  c.sweep.num_users = {2, 4};
  c.mi.samples = 40;
  c.mi.mine.iterations = 100;
  c.mi.measure_rounds = 2;
  c.bounds.gradient_samples = 20;
  const auto a = TempDir("a"), b = TempDir("b");
  RunCommand("leakage", c, a.string());
  RunCommand("leakage", c, b.string());
  const std::string first = ReadFile(a / "leakage.csv");
  EXPECT_EQ(first, ReadFile(b / "leakage.csv"));
  // Two cells, two measured rounds each, plus one mean row per cell.
  EXPECT_EQ(Split(first, '\n').size(), 1u + 6u);
  EXPECT_NE(first.find("mean_over_rounds=2"), std::string::npos);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(CommandTest, JobsDoNotChangeOutput) {
  ExperimentConfig c = Small();
  c.sweep.num_users = {2, 4};
  c.mi.samples = 40;
  c.mi.repetitions = 2;
  c.mi.mine.iterations = 100;
  c.bounds.gradient_samples = 20;
  c.attack.iterations = 50;
  c.attack.seeds = 2;
  for (auto* cmd : {&CmdLeakage, &CmdAttack}) {
    c.jobs = 1;
    const std::string serial = ToCsv(cmd(c, "").rows);
    c.jobs = 3;
    EXPECT_EQ(ToCsv(cmd(c, "").rows), serial);
  }
}

TEST(CommandTest, CounterexampleRows) {
  const CommandOutput out = CmdCounterexample(Small(), "");
  ASSERT_EQ(out.rows.size(), 10u);
  EXPECT_EQ(*out.rows[0].accuracy, 1.0);
  EXPECT_NEAR(*out.rows[5].accuracy, 0.5, 0.06);
  EXPECT_THROW(RunCommand("nope", Small(), ""), ConfigError);
}

}  // namespace
}  // namespace fllab
