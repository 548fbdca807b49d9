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

#include "rabi/dynamics.hpp"

namespace rabi {

/// Density matrix over the full basis of a SpaceSpec.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(MatrixXc rho);
  static DensityMatrix pure(const VectorXc& psi);

  const MatrixXc& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }
  double trace_defect() const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  /// Throws ShapeError unless Hermitian < 1e-10, trace 1 within 1e-8, min eigenvalue > -1e-8.
  void validate() const;
  double population(const VectorXc& psi) const { return psi.dot(rho_ * psi).real(); }

 private:
  MatrixXc rho_;
};

/// Step function in time with optional linear ramps at each switch.
struct PiecewiseConstant {
  std::vector<double> switch_times;  ///< ascending
  std::vector<double> values;        ///< values.size() == switch_times.size() + 1
  double ramp = 0.0;                 ///< ramp duration, 0 for an instantaneous switch

  static PiecewiseConstant constant(double v) { return {{}, {v}, 0.0}; }
  static PiecewiseConstant step(double before, double t_switch, double after) {
    return {{t_switch}, {before, after}, 0.0};
  }
  double at(double t) const;
  /// Times at which the value starts or stops changing.
  std::vector<double> breakpoints() const;
};

struct DissipationRates {
  double kappa_in = 0.0;  ///< intrinsic decay of every mode
  PiecewiseConstant kappa_c = PiecewiseConstant::constant(0.0);  ///< coupler decay of every mode
  VectorXd gamma;      ///< relaxation per qubit; empty means zero
  VectorXd gamma_phi;  ///< pure dephasing per qubit; empty means zero

  void validate(const SpaceSpec& spec) const;
  double kappa(double t) const { return kappa_in + kappa_c.at(t); }
  double gamma_of(int m) const { return m < gamma.size() ? gamma(m) : 0.0; }
  double gamma_phi_of(int m) const { return m < gamma_phi.size() ? gamma_phi(m) : 0.0; }
  bool all_zero() const;
};

/// Bare-basis Lindblad generator with a fixed set of jump operators.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const BasisTable& basis);

  /// drho = -i[H, rho] + sum D(L) rho, with mode decay rate `kappa`.
  void apply(const SparseXd& h, double kappa, const DissipationRates& rates, const MatrixXc& rho,
             MatrixXc& drho) const;

 private:
  std::vector<SparseXd> a_, sm_;
  VectorXd n_total_;
  std::vector<VectorXd> up_;  ///< |up><up| diagonal per qubit
  std::vector<VectorXd> sz_;
};

/// Right-hand side of the Lindblad master equation at fixed H.
MatrixXc lindblad_rhs(const MatrixXc& rho, const SparseXd& h, const DissipationRates& rates, const SpaceSpec& spec,
                      double t = 0.0);

/// Dressed generator: jumps |j><k| between eigenstates of a frozen H.
class DressedGenerator {
 public:
  DressedGenerator(const BasisTable& basis, const SparseXd& h, const ModelParams& params, double kappa,
                   const DissipationRates& rates);

  const VectorXd& energies() const { return energies_; }
  const MatrixXc& eigenvectors() const { return v_; }
  /// rates(j, k) = total rate of the jump |j><k| (k above j).
  const MatrixXd& rates() const { return gamma_; }

  MatrixXc to_eigenbasis(const MatrixXc& rho) const { return v_.adjoint() * rho * v_; }
  MatrixXc from_eigenbasis(const MatrixXc& rho) const { return v_ * rho * v_.adjoint(); }
  /// Generator acting on a density matrix written in the eigenbasis.
  void apply_eigen(const MatrixXc& rho, MatrixXc& drho) const;

 private:
  VectorXd energies_;
  MatrixXc v_;
  MatrixXd gamma_;
  VectorXd loss_;  ///< total outgoing rate of each eigenstate
  std::vector<MatrixXc> z_;      ///< sigma_z per qubit in the eigenbasis, when dephasing is on
  std::vector<double> gphi_;
};

/// Dressed-master-equation right-hand side in the bare basis.
MatrixXc dressed_rhs(const MatrixXc& rho, const SparseXd& h, const ModelParams& params,
                     const DissipationRates& rates, const SpaceSpec& spec, double t = 0.0);

enum class Engine { lindblad, dressed };
Engine parse_engine(const std::string& name);
std::string to_string(Engine e);

struct MasterConfig {
  SpaceSpec space;
  Schedule schedule;
  DissipationRates rates;
  double t_end = 0.0;  ///< parameters are held at their final values past the schedule
  Engine engine = Engine::lindblad;
  IntegratorConfig integrator;
  int samples = 201;
  /// Additional sample times merged into the uniform grid.
  std::vector<double> extra_samples;
  std::vector<TrackedState> tracked;
  std::optional<TrackedState> target;
  /// Positivity failures below this abort the run.
  double positivity_abort = -1e-3;
};

struct OpenTrajectoryResult {
  std::vector<double> times;
  MatrixXd populations;
  std::vector<std::string> population_names;
  VectorXd fidelity;           ///< <target|rho|target>
  MatrixXd photon_numbers;     ///< (sample, mode) <a_i^dag a_i>
  MatrixXd emission_rates;     ///< kappa_c(t) <a_i^dag a_i>
  VectorXd integrated_emission;
  double max_trace_drift = 0.0;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  bool positivity_flag = false;  ///< min eigenvalue fell below -1e-6
  DensityMatrix final_state;
  IntegrationStats stats;
};

OpenTrajectoryResult propagate_master(const DensityMatrix& rho0, const MasterConfig& config);

struct CatchReleaseConfig {
  std::string trajectory = "fig2_stark";
  TrajectoryOverrides overrides;
  int cutoff = 2;
  double kappa_in = 1e-4;
  double gamma = 1e-5;
  double gamma_phi = 2e-5;
  double kappa_c = 0.1;
  double release_periods = 3.0;
  double end_periods = 3.0 + 60.0 / kTwoPi;
  double ramp = 0.0;
  Engine engine = Engine::lindblad;
  IntegratorConfig integrator;
  int samples = 801;
};

struct CatchReleaseReport {
  double generation_fidelity = 0.0;
  double release_fidelity = 0.0;
  double hold_fidelity_loss = 0.0;
  VectorXd integrated_emission;
  VectorXd emission_fractions;
  VectorXd expected_fractions;
  /// Emission rates at the first sample after the couplers open, normalized.
  VectorXd release_rate_fractions;
  OpenTrajectoryResult trajectory;
  SpaceSpec space;
};

/// Generate, hold, then open the couplers at the release time.
CatchReleaseReport catch_and_release(const CatchReleaseConfig& config);

}  // namespace rabi
