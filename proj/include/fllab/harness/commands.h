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

// The experiment commands behind the fllab tool.

#ifndef FLLAB_HARNESS_COMMANDS_H_
#define FLLAB_HARNESS_COMMANDS_H_

#include <string>
#include <vector>

#include "fllab/harness/config.h"
#include "fllab/harness/report.h"

namespace fllab {

struct CommandOutput {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
};

// Per-round test accuracy of one training run.
CommandOutput CmdTrain(const ExperimentConfig& config, const std::string& out_dir);
// MI leakage over the (N, B) sweep, or accumulated over sweep.rounds.
CommandOutput CmdLeakage(const ExperimentConfig& config, const std::string& out_dir);
// Closed-form bounds over the (N, B, T) sweep.
CommandOutput CmdBounds(const ExperimentConfig& config, const std::string& out_dir);
// Gradient inversion PSNR over sweep.num_users and attack seeds.
CommandOutput CmdAttack(const ExperimentConfig& config, const std::string& out_dir);
// Leakage and accuracy over sweep.num_users x sweep.epsilons.
CommandOutput CmdDpSweep(const ExperimentConfig& config, const std::string& out_dir);
// Sparse-support detector versus its in-span control.
CommandOutput CmdCounterexample(const ExperimentConfig& config, const std::string& out_dir);

std::vector<std::string> CommandNames();

// Runs the named command and writes <out_dir>/<name>.csv (nothing when out_dir is empty).
CommandOutput RunCommand(const std::string& name, const ExperimentConfig& config,
                         const std::string& out_dir);

}  // namespace fllab

#endif  // FLLAB_HARNESS_COMMANDS_H_
