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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rabi/integrator.hpp"
#include "rabi/schedule.hpp"
#include "rabi/spectra.hpp"

namespace rabi {

/// A named, possibly time-dependent, reference ket over the run's full basis.
struct TrackedState {
  std::string name;
  std::function<VectorXc(double)> at;

  static TrackedState fixed(std::string name, VectorXc psi);
};

struct SolverConfig {
  IntegratorConfig integrator;
  /// Number of evenly spaced samples including t = 0 and t = T.
  int samples = 101;
  /// Propagate inside the parity block of the initial state when it has definite parity.
  bool use_parity = true;
  bool keep_snapshots = false;
  std::vector<TrackedState> tracked;
  /// Fidelity reference; a fixed target or one that moves with t.
  std::optional<TrackedState> target;
};

struct TrajectoryResult {
  std::vector<double> times;
  std::vector<VectorXc> snapshots;
  /// populations(k, s) = |<tracked_s(t_k)|psi(t_k)>|^2.
  MatrixXd populations;
  std::vector<std::string> population_names;
  VectorXd fidelity;  ///< against the target; empty without one
  double final_fidelity = 0.0;
  double norm_drift = 0.0;
  IntegrationStats stats;
  VectorXc final_state;
};

/// Integrates i d/dt psi = H(t) psi along the schedule from t = 0 to its end.
TrajectoryResult propagate(const Schedule& schedule, const SpaceSpec& spec, const VectorXc& psi0,
                           const SolverConfig& config = {});

/// Normalized amplitude pattern of |W_M> for couplings g.
VectorXd w_photons(const VectorXd& g);
/// |W_M> (x) qubit part: the singlet (dn up - up dn)/sqrt2 for two qubits when
/// `singlet`, otherwise all qubits down.
PureState w_target(const SpaceSpec& spec, const VectorXd& g, bool singlet = true);

struct WGenerationConfig {
  std::string trajectory = "fig2_stark";
  TrajectoryOverrides overrides;
  /// Used instead of the named trajectory when set.
  std::optional<TrajectoryInfo> custom;
  int cutoff = 0;  ///< 0 selects the default for the mode count
  SolverConfig solver;
  bool check_convergence = true;
  bool auto_escalate = true;
  int max_cutoff = 12;
  double convergence_tol = 1e-3;
  /// Also track the instantaneous dark state and its fidelity.
  bool track_dark_state = false;
};

struct WGenerationResult {
  TrajectoryInfo trajectory;
  SpaceSpec space;
  TrajectoryResult result;
  double fidelity = 0.0;
  /// Fidelity at cutoff + 2 when the check ran.
  std::optional<double> check_fidelity;
  int check_cutoff = 0;
  bool converged = true;
};

/// Starts from |0_M up up> and reports |<W_M psi_B|psi(T)>|^2.
WGenerationResult run_w_generation(const WGenerationConfig& config);

struct DiagnosticsConfig {
  int points = 81;
  double reference_energy = 1.0;
  Sector sector = Sector::even;
  ExclusionRule exclusion;
  int nearest = 3;
  int threads = 1;
};

struct AdiabaticDiagnostics {
  SpectrumSweep sweep;  ///< grid in units of 1/omega
  int reference_track = -1;
  MatrixXd couplings;
  GapResult gap;
  NearestLevels nearest;
  double max_ratio = 0.0;  ///< over the nearest levels
};

/// Instantaneous spectrum along the schedule with gap and R = |<E_m|Hdot|E_ref>| / (E_m - E_ref)^2.
AdiabaticDiagnostics adiabatic_diagnostics(const Schedule& schedule, const SpaceSpec& spec,
                                           const DiagnosticsConfig& config = {});

struct LeastTimeConfig {
  double u = 0.5;
  double threshold = 0.99;
  double g_lo = 0.0;  ///< open interval (g_lo, g_hi) for g_max
  double g_hi = 1.2;
  double g_step = 0.05;
  double t_lo = 1.0;  ///< periods
  double t_hi = 6.0;
  double t_step = 0.1;
  double t_tol = 0.02;
  int cutoff = 6;
  IntegratorConfig integrator;
  int threads = 1;
};

struct LeastTimeResult {
  bool found = false;
  double t_min = 0.0;  ///< periods
  double g_best = 0.0;
  double fidelity = 0.0;
  bool monotone = false;  ///< best fidelity at t_min + t_tol also reaches the threshold
  int evaluations = 0;
};

/// Smallest duration of the fig2_stark family at Stark shift `u` for which
/// some g_max reaches the fidelity threshold.
LeastTimeResult least_time_search(const LeastTimeConfig& config);
/// max over g_max in the configured range at a fixed duration.
std::pair<double, double> best_fidelity_at(const LeastTimeConfig& config, double periods, int* evaluations = nullptr);

struct MIndependenceReport {
  std::vector<int> modes;
  std::vector<double> fidelities;
  double fidelity_spread = 0.0;
  /// max over snapshots and M of the distance between reduced amplitudes and the M = 1 run.
  double max_reduced_distance = 0.0;
};

MIndependenceReport m_independence_check(const WGenerationConfig& base, const std::vector<int>& modes);

}  // namespace rabi
