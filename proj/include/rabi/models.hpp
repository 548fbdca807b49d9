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
#include <vector>

#include "rabi/hilbert.hpp"

namespace rabi {

/// Hamiltonian symbols in units of the reference frequency.
/// g and u are n_modes x n_qubits: g(i, j) couples mode i to qubit j.
struct ModelParams {
  VectorXd delta;
  VectorXd omega;
  MatrixXd g;
  MatrixXd u;

  /// omega = 1, everything else zero.
  static ModelParams zeros(const SpaceSpec& spec);

  int n_qubits() const { return static_cast<int>(delta.size()); }
  int n_modes() const { return static_cast<int>(omega.size()); }
  bool has_stark() const { return u.size() > 0 && u.cwiseAbs().maxCoeff() > 0.0; }

  /// Shapes, finiteness and omega > 0.
  void validate(const SpaceSpec& spec) const;
  /// Shapes only; used for rate (derivative) parameter sets where omega may vanish.
  void check_shapes(const SpaceSpec& spec) const;
};

/// sum_i w_i n_i + sum_ij g_ij sx_j (a_i + a_i^dag) + sum_j D_j sz_j + sum_ij U_ij sz_j n_i.
/// Linear in the parameters and performs no positivity checks, so it also
/// assembles time derivatives from parameter slopes.
SparseXd assemble_hamiltonian(const BasisTable& basis, const ModelParams& params);

/// Plain multiqubit multimode Rabi model; requires u == 0.
Operator hamiltonian_mqrm(const SpaceSpec& spec, const ModelParams& params);
/// Rabi-Stark model.
Operator hamiltonian_rabi_stark(const SpaceSpec& spec, const ModelParams& params);

/// Orthogonal mode recombination b_j = sum_i coeffs(j, i) a_i with row 0 along g.
struct BogoliubovFrame {
  MatrixXd coeffs;
  double g_norm = 0.0;

  int n_modes() const { return static_cast<int>(coeffs.rows()); }
};

BogoliubovFrame bogoliubov_frame(const VectorXd& g);

/// Common coupling pattern when every qubit column of g is proportional to
/// the same vector; empty otherwise.  Tolerance is relative.
std::optional<VectorXd> common_coupling_pattern(const MatrixXd& g, double tol = 1e-10);

Operator b_operator(const SpaceSpec& spec, const BogoliubovFrame& frame, int j);
/// Number operator of a free Bogoliubov mode; j >= 1 (the bright mode j = 0 is not conserved).
Operator b_number_operator(const SpaceSpec& spec, const BogoliubovFrame& frame, int j);

SparseXd sparse_b_operator(const BasisTable& basis, const BogoliubovFrame& frame, int j);
/// Sum of the free-mode number operators, sum_{j >= 1} b_j^dag b_j.
SparseXd sparse_free_mode_number(const BasisTable& basis, const BogoliubovFrame& frame);

struct MatchedLevel {
  double energy_multi = 0.0;
  double energy_single = 0.0;
  int parity = 0;
  double discrepancy() const { return std::abs(energy_multi - energy_single); }
};

struct ExtraLevel {
  double energy = 0.0;
  int k = 0;                   ///< sum of free-mode occupations
  double nb_total = 0.0;       ///< <sum_j n_bj> before rounding
  double partner_energy = 0.0; ///< single-mode level it is lifted from
  double offset_error = 0.0;   ///< |E - partner - K omega|
};

struct EquivalenceOptions {
  double energy_window = 1.5;  ///< only levels at or below this energy are compared
  int sector = 0;              ///< +1, -1 or 0 for both
};

struct SpectrumEquivalenceReport {
  std::vector<MatchedLevel> matched;
  std::vector<ExtraLevel> extra;
  double max_matched_discrepancy = 0.0;
  double max_offset_error = 0.0;
  double max_label_defect = 0.0;  ///< max |<N_b> - K|
  int unmatched_single = 0;       ///< single-mode levels in window without a partner
};

/// Single-mode model with the bright-mode couplings of `params`; needs equal omega_i,
/// column-proportional g and mode-independent U.
ModelParams single_mode_reduction(const ModelParams& params);

/// Compares the n_b = 0 sector of an M-mode model with a single-mode model of
/// equal total coupling.  Throws ConditionError when the two are not equivalent.
SpectrumEquivalenceReport spectrum_equivalence_report(const SpaceSpec& spec_m,
                                                      const ModelParams& params_m,
                                                      const SpaceSpec& spec_1,
                                                      const ModelParams& params_1,
                                                      const EquivalenceOptions& options = {});

}  // namespace rabi
