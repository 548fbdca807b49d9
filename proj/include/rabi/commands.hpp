// Copyright 2026 The rabi-dark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rabi/config.hpp"

namespace rabi {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCondition = 2, kExitConvergence = 3 };

struct CommandOptions {
  std::string out_dir = ".";
  bool allow_unconverged = false;
  int threads = 1;
};

/// Command-line values that replace config entries.
struct FlagOverrides {
  std::optional<int> cutoff;
  std::optional<std::string> engine;
  std::optional<std::string> sector;
};

void apply_overrides(ConfigFile& file, const FlagOverrides& flags);

std::vector<std::string> command_names();

/// Sweep coordinate values and the model at each of them.
struct SweepPlan {
  std::vector<double> x;
  ParamsAt params_at;
};
SweepPlan plan_sweep(const RunConfig& config);

/// W-generation settings of a closed-system run.
WGenerationConfig generation_config(const RunConfig& config);

int cmd_spectrum(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_dark_verify(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_adiabatic(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_master(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_min_time(const RunConfig& config, const CommandOptions& options, std::ostream& out);

/// Loads the config, runs `command` and maps failures to exit codes with a diagnostic on `err`.
int run_command(const std::string& command, const std::string& config_path, const FlagOverrides& flags,
                const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace rabi
