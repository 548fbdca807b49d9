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

#include "rabi/models.hpp"

namespace rabi {

/// Piecewise-linear parameter path.  Knot times are in natural units 1/omega;
/// values[k] holds every Hamiltonian coefficient at knots[k].
class Schedule {
 public:
  Schedule() = default;
  Schedule(std::vector<double> knots, std::vector<ModelParams> values);

  static Schedule constant(const ModelParams& p, double duration);
  static Schedule linear(const ModelParams& from, const ModelParams& to, double duration);

  /// Appends a constant segment of length `extra` at the final values.
  Schedule then_hold(double extra) const;

  double duration() const { return knots_.back(); }
  double duration_periods() const { return time_to_periods(duration()); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<ModelParams>& values() const { return values_; }
  int n_segments() const { return static_cast<int>(knots_.size()) - 1; }

  /// Segment containing t; times past the end map to the last segment.
  int segment(double t) const;
  /// Parameters at t; held at the final values for t > duration.
  ModelParams at(double t) const;
  /// Time derivative of every coefficient on the segment containing t (zero past the end).
  ModelParams slope(double t) const;
  bool constant_on(int segment) const;

  void validate(const SpaceSpec& spec) const;

 private:
  std::vector<double> knots_;
  std::vector<ModelParams> values_;
};

/// Adjustments applied to a named trajectory.
struct TrajectoryOverrides {
  std::optional<double> periods;    ///< duration in units of 2 pi / omega
  std::optional<int> modes;         ///< M; the total coupling sum_i g_i^2 is kept
  std::optional<VectorXd> g_ratios; ///< relative couplings g_1 : ... : g_M
  std::optional<double> g_norm2;    ///< final sum_i g_i^2 per qubit
  std::optional<double> g_max;      ///< final coupling of every mode (uniform ratios)
  std::optional<double> u;          ///< uniform Stark shift U_ij
  std::optional<double> delta1_end;
  std::optional<double> delta2_end;
};

struct TrajectoryInfo {
  std::string name;
  SpaceSpec space;  ///< two qubits, M modes, default cutoff
  Schedule schedule;
};

/// Known names: fig1_rabi, fig2_stark, fig3_stark_asym, figS2a, figS2c, figS2e, figS2g.
std::vector<std::string> standard_trajectory_names();
TrajectoryInfo standard_trajectory(const std::string& name, const TrajectoryOverrides& overrides = {});

/// Default photon cutoff for adiabatic runs with M modes.
int default_cutoff(int modes);

}  // namespace rabi
