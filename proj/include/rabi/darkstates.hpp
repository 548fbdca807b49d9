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

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rabi/models.hpp"

namespace rabi {

enum class DarkStateFamily {
  psi_d,
  psi_2plus,
  psi_ds,
  psi_2splus,
  psi_2s_odd_a,
  psi_2s_odd_b,
  psi_3s_minus,
  psi_N_composite,
  phi_K_lifted,
  squeezed_down,
  nullspace,
};

std::string to_string(DarkStateFamily f);
DarkStateFamily parse_family(const std::string& name);

/// A state together with the evidence that it is an eigenstate.
struct Certificate {
  DarkStateFamily family = DarkStateFamily::psi_d;
  PureState state;
  double energy = 0.0;
  double residual = 0.0;  ///< ||(H - E) psi|| in the state's own space
  int parity = 0;         ///< +1, -1, or 0 when not a parity eigenstate
  double parity_defect = 0.0;
  std::pair<int, int> photon_bound{0, 0};
  /// Squeezed family only: residual against the Hamiltonian of a space with one extra photon per mode.
  double untruncated_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Builds a certificate for `state` as an eigenstate with energy `energy` of
/// the Rabi-Stark Hamiltonian with `params`.  The phase is fixed, the norm set to 1.
Certificate certify(const SpaceSpec& spec, const ModelParams& params, PureState state, double energy,
                    DarkStateFamily family);

/// ||(H - E) psi||.
double certificate_residual(const SpaceSpec& spec, const ModelParams& params, const VectorXc& psi,
                            double energy);

/// Two qubits, one mode, no Stark terms: D1 + D2 = w, g11 = g12.
Certificate psi_d(const SpaceSpec& spec, const ModelParams& params);
/// Two qubits, any number of modes, no Stark terms: D1 + D2 = w, g_i1 = g_i2.
Certificate psi_2plus(const SpaceSpec& spec, const ModelParams& params);
/// Two qubits, one mode, Stark terms allowed.
Certificate psi_ds(const SpaceSpec& spec, const ModelParams& params);
/// Two qubits, any number of modes, Stark terms allowed.
Certificate psi_2splus(const SpaceSpec& spec, const ModelParams& params);

enum class OddVariant { a, b };
/// Odd parity dark state at E = D1 - D2 (a) or E = D2 - D1 (b).
Certificate psi_odd_parity(const SpaceSpec& spec, const ModelParams& params, OddVariant variant);

/// Three qubits: D_j = w_i = w, g_i1 = g_i2 + g_i3.
Certificate psi_3s_minus(const SpaceSpec& spec, const ModelParams& params);

/// psi_2splus on qubits 0 and 1 followed by `n_bell` singlets on the
/// remaining qubit pairs.
Certificate psi_N_composite(const SpaceSpec& spec, const ModelParams& params, int n_bell);

/// Lifts a single-mode eigenvector (over `spec_1`, energy `e_single`) into
/// the M-mode space through b_1^dag and applies prod_j (b_j^dag)^n_j / sqrt(n_j!).
/// `occupations` lists n_j for the free modes j = 1..M-1.
Certificate phi_K_state(const SpaceSpec& spec, const ModelParams& params, const SpaceSpec& spec_1,
                        const VectorXc& single_mode_eigvec, double e_single,
                        const std::vector<int>& occupations);

/// All qubits down, every mode in the truncated zero eigenvector of
/// (a + a^dag).  A finite `xi` multiplies the n-th pair amplitude by tanh(xi)^n.
Certificate squeezed_dark_state(const SpaceSpec& spec, const ModelParams& params,
                                double xi = std::numeric_limits<double>::infinity());

/// Kernel of (H - E) on the ansatz of states with at most one photon, at each
/// candidate energy.  Empty when no solution exists.
std::vector<Certificate> one_photon_nullspace(const SpaceSpec& spec, const ModelParams& params, int parity,
                                              std::optional<double> energy = std::nullopt);

/// Candidate energies scanned by one_photon_nullspace.
std::vector<double> nullspace_candidate_energies(const ModelParams& params);

/// Plain-text record: key=value lines followed by the nonzero amplitudes.
std::string to_record(const Certificate& c, const SpaceSpec& spec);

/// Readable label such as "|0 1, dn up>".
std::string format_label(const BasisLabel& label);

}  // namespace rabi
