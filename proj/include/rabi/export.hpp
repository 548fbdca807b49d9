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

#include <ostream>
#include <string>
#include <vector>

#include "rabi/config.hpp"

namespace rabi {

inline constexpr const char* kVersion = "0.1.0";

/// Column-labelled numeric table; one row per sample.
struct Table {
  std::vector<std::string> columns;
  MatrixXd data;
};

/// Shortest round-trip-stable text for v at 12 significant digits.
std::string format_number(double v);

/// '#'-prefixed lines: version, command, config name and every config entry.
std::vector<std::string> metadata_header(const std::string& command, const ConfigFile& file);

void write_table(std::ostream& os, const std::vector<std::string>& header, const Table& table);
/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

/// t (periods), fidelity when present, then one column per tracked state; every `stride`-th sample.
Table trajectory_table(const TrajectoryResult& result, int stride = 1);
/// As trajectory_table plus <a_i^dag a_i> and emission_rate_i per mode.
Table open_trajectory_table(const OpenTrajectoryResult& result, int stride = 1);
/// Long format: point, x, track, energy, parity, photons, free_occupation.
Table spectrum_table(const SpectrumSweep& sweep, const std::vector<double>& x);

}  // namespace rabi
