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


#include <iostream>

#include <CLI11.hpp>

#include "rabi/commands.hpp"
#include "rabi/export.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dark states of multimode Rabi models"};
  app.set_version_flag("--version", std::string("rabi-dark ") + rabi::kVersion);
  app.require_subcommand(1);

  std::string config;
  rabi::FlagOverrides flags;
  rabi::CommandOptions options;
  int cutoff = 0;
  std::string engine, sector;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "Sweep the spectrum along a coupling or time axis"},
      {"dark-verify", "Build and certify a dark state"},
      {"adiabatic", "Closed-system W-state generation with diagnostics"},
      {"master", "Open-system propagation and catch and release"},
      {"min-time", "Least generation time against the Stark shift"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", options.out_dir, "Output directory");
    sub->add_option("--engine", engine, "Master-equation engine")->check(CLI::IsMember({"lindblad", "dressed"}));
    sub->add_option("--sector", sector, "Parity sector")->check(CLI::IsMember({"even", "odd", "full"}));
    sub->add_flag("--allow-unconverged", options.allow_unconverged, "Exit 0 when the cutoff check fails");
    sub->add_option("--cutoff", cutoff, "Photon cutoff per mode")->check(CLI::PositiveNumber);
    sub->add_option("--threads", options.threads, "Worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rabi::kExitConfig;
  }
  if (cutoff > 0) flags.cutoff = cutoff;
  if (!engine.empty()) flags.engine = engine;
  if (!sector.empty()) flags.sector = sector;
  const std::string command = app.get_subcommands().front()->get_name();
  return rabi::run_command(command, config, flags, options, std::cout, std::cerr);
}
