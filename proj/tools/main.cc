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

// fllab: run one experiment command from an INI config.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fllab/harness/commands.h"
#include "fllab/harness/config.h"
#include "fllab/util/error.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated-learning privacy lab"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides FLLAB_OUT_DIR and the config)");
  app.add_option("--seed", seed, "Override experiment.seed");
  app.add_option("--jobs", jobs, "Override experiment.jobs")->check(CLI::PositiveNumber);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  for (const std::string& name : fllab::CommandNames()) {
    app.add_subcommand(name, fmt::format("Run the {} command", name))->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    fllab::ExperimentConfig config =
        config_path.empty() ? fllab::ExperimentConfig{} : fllab::LoadConfig(config_path);
    if (seed) config.seed = config.fl.seed = *seed;
    if (jobs) config.jobs = config.fl.jobs = *jobs;
    if (out_dir.empty()) {
      const char* env = std::getenv("FLLAB_OUT_DIR");
      out_dir = env != nullptr && *env != '\0' ? env : config.out_dir;
    }
    config.out_dir = out_dir;
    if (print_config) {
      std::cout << fllab::SerializeConfig(config);
      return 0;
    }
    config.Validate();
    const std::string name = app.get_subcommands().front()->get_name();
    const fllab::CommandOutput result = fllab::RunCommand(name, config, out_dir);
    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << fmt::format("{}/{}.csv ({} rows)\n", out_dir, name, result.rows.size());
    return 0;
  } catch (const fllab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
