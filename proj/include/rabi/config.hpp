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
#include <string>
#include <vector>

#include "rabi/openquantum.hpp"

namespace rabi {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;  ///< 0 for entries set from the command line
};

/// Flat `section.key = value` text. Values are JSON scalars or arrays, or bare words.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& source = "<string>");
  static ConfigFile load(const std::string& path);

  /// Adds or replaces an entry; later reads see the new value.
  void set(const std::string& key, const std::string& value);

  const std::string& source() const { return source_; }
  const std::vector<ConfigEntry>& entries() const { return entries_; }
  bool has(const std::string& key) const { return find(key) != nullptr; }
  bool has_section(const std::string& section) const;

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::optional<double> number(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Scalars broadcast to `size` when `size` > 0.
  std::optional<VectorXd> vector(const std::string& key, Index size = 0) const;
  /// Scalars broadcast to rows x cols.
  std::optional<MatrixXd> matrix(const std::string& key, Index rows, Index cols) const;

  /// ConfigError carrying the location of `key`.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const ConfigEntry* find(const std::string& key) const;

  std::string source_;
  std::vector<ConfigEntry> entries_;
};

/// Every accepted key.
const std::vector<std::string>& known_config_keys();

struct SolverBlock {
  IntegratorConfig integrator;
  int samples = 101;
  bool check_convergence = true;
  bool auto_escalate = true;
  int max_cutoff = 12;
  double convergence_tol = 1e-3;
};

struct DissipationBlock {
  double kappa_in = 0.0;
  double kappa_c = 0.0;
  std::optional<double> release_periods;
  double end_periods = 0.0;
  double ramp = 0.0;
  VectorXd gamma;
  VectorXd gamma_phi;
  Engine engine = Engine::lindblad;
  std::string initial = "vacuum";
  bool compare_engines = false;
  int samples = 201;
};

struct SweepBlock {
  std::string coordinate = "g";
  double from = 0.0;
  double to = 1.0;
  int points = 101;
  Sector sector = Sector::even;
  std::vector<double> flat_energies{1.0};
  bool equivalence = false;
};

struct DarkBlock {
  std::string family;
  double tolerance = 1e-10;
  bool nullspace_check = false;
  int n_bell = 1;
  double xi = 0.0;  ///< 0 selects the infinite-squeezing pattern
  std::string variant = "a";
  std::vector<int> occupations;
  int parity = 1;
  std::optional<double> energy;
};

struct DiagnosticsBlock {
  bool enabled = true;
  int points = 81;
  double reference_energy = 1.0;
  double min_ratio = 0.05;
};

struct MinTimeBlock {
  LeastTimeConfig search;
  std::vector<double> u_grid{0.5};
};

struct OutputBlock {
  std::string prefix = "run";
  int stride = 1;
};

/// Parsed and validated contents of a run configuration.
struct RunConfig {
  ConfigFile file;
  SpaceSpec space;
  ModelParams params;      ///< start values; final values of a standard trajectory
  std::optional<std::string> trajectory;
  TrajectoryOverrides overrides;
  Schedule schedule;
  bool has_schedule = false;
  SolverBlock solver;
  std::optional<DissipationBlock> dissipation;
  SweepBlock sweep;
  DarkBlock dark;
  DiagnosticsBlock diagnostics;
  MinTimeBlock min_time;
  OutputBlock output;
};

RunConfig load_run_config(const ConfigFile& file);

}  // namespace rabi
