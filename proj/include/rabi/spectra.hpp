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

#include "rabi/models.hpp"

namespace rabi {

enum class Sector { even, odd, full };

int sector_parity(Sector s);
Sector parse_sector(const std::string& name);
std::string to_string(Sector s);

/// Ascending spectrum with eigenvectors as columns over the full basis.
struct EigenSystem {
  VectorXd energies;
  MatrixXc states;
  std::vector<int> parity;  ///< 0 when the matrix mixes parities

  Index size() const { return energies.size(); }
  PureState state(Index k) const { return PureState(states.col(k)); }
};

/// Diagonalizes each parity block separately, or the whole matrix when it
/// does not conserve parity and the full space is requested.  Ties are ordered by parity
/// (even first) then by block index.  Throws ShapeError for non-Hermitian input.
EigenSystem eigensystem(const SpaceSpec& spec, const Operator& h, Sector sector = Sector::full);
EigenSystem eigensystem(const BasisTable& basis, const SparseXd& h, Sector sector = Sector::full);

/// max_k ||H v_k - E_k v_k|| / max(1, |E_k|).
double eigen_residual(const MatrixXc& h, const EigenSystem& es);
/// max-norm of V^dag V - 1.
double gram_residual(const EigenSystem& es);

struct SweepOptions {
  Sector sector = Sector::even;
  /// Frame for free-mode labels; derived from the coupling pattern when empty.
  std::optional<BogoliubovFrame> frame;
  int threads = 1;
  bool keep_states = true;
  double overlap_floor = 0.5;
  double ambiguity_tol = 1e-6;
  double degeneracy_tol = 1e-9;
};

struct TrackFlag {
  Index point = 0;
  int track = 0;
  double overlap = 0.0;
  bool ambiguous = false;
};

struct SpectrumSweep {
  std::vector<double> grid;
  std::vector<EigenSystem> levels;
  /// tracks[p][t] is the level index of track t at grid point p.
  std::vector<std::vector<Index>> tracks;
  /// nb_labels[j - 1](t, p) = <n_bj> on track t at point p, for free modes j >= 1.
  std::vector<MatrixXd> nb_labels;
  /// photon_number(t, p) = <sum_i n_i>.
  MatrixXd photon_number;
  std::vector<TrackFlag> flags;

  int n_tracks() const { return tracks.empty() ? 0 : static_cast<int>(tracks.front().size()); }
  Index n_points() const { return static_cast<Index>(grid.size()); }
  double energy(int track, Index point) const;
  VectorXd track_energies(int track) const;
  int track_parity(int track) const;
  /// Free-mode occupation sum_{j >= 1} <n_bj> per point.
  VectorXd free_occupation(int track) const;
  /// Eigenvector of track t at point p (requires keep_states).
  VectorXc track_state(int track, Index point) const;
};

using ParamsAt = std::function<ModelParams(double)>;

/// Diagonalizes the model at each grid coordinate and links levels into
/// tracks by maximal successive overlap.  Degenerate clusters are rotated to
/// align with the neighbouring point before matching.
SpectrumSweep sweep_spectrum(const SpaceSpec& spec, const ParamsAt& params_at,
                             const std::vector<double>& grid, const SweepOptions& options = {});

/// Track whose energy stays within `tol` of `energy` at every point.
std::optional<int> find_flat_track(const SpectrumSweep& sweep, double energy, double tol = 1e-8);
/// max - min of a track's energy over the sweep.
double track_flatness(const SpectrumSweep& sweep, int track);

struct RatioEntry {
  Index level = 0;
  double energy = 0.0;
  double gap = 0.0;
  double matrix_element = 0.0;
  double ratio = 0.0;
};

struct AdiabaticRatios {
  std::vector<RatioEntry> entries;
  /// Levels within the degeneracy tolerance of E_ref; ratio is left at 0.
  std::vector<RatioEntry> degenerate;
};

/// R_m = |<E_m|Hdot|ref>| / (E_m - E_ref)^2.
AdiabaticRatios adiabatic_ratio(const MatrixXc& h_dot, const EigenSystem& es, const VectorXc& ref,
                                double e_ref, double degeneracy_tol = 1e-8);
AdiabaticRatios adiabatic_ratio(const SparseXd& h_dot, const EigenSystem& es, const VectorXc& ref,
                                double e_ref, double degeneracy_tol = 1e-8);
inline AdiabaticRatios adiabatic_ratio(const Operator& h_dot, const EigenSystem& es,
                                       const PureState& ref, double e_ref,
                                       double degeneracy_tol = 1e-8) {
  return adiabatic_ratio(h_dot.matrix(), es, ref.amplitudes(), e_ref, degeneracy_tol);
}

/// |<E_m|Hdot|E_ref>| for every track at every point; rows are tracks.
MatrixXd track_couplings(const SpaceSpec& spec, const SpectrumSweep& sweep, int reference_track,
                         const ParamsAt& rates_at);

struct ExclusionRule {
  double max_free_occupation = 0.5;
  double min_coupling = 1e-10;
  /// Tracks whose peak R = coupling / gap^2 stays below this are excluded too.
  double min_ratio = 0.05;
  double degeneracy_tol = 1e-8;
};

struct GapResult {
  double gap = 0.0;
  int track = -1;
  Index point = 0;
  std::vector<int> candidates;
  std::vector<int> excluded;
};

GapResult effective_min_gap(const SpectrumSweep& sweep, int reference_track,
                            const MatrixXd& couplings, const ExclusionRule& rule = {});

/// ratio(t, p) = couplings(t, p) / (E_t - E_ref)^2, zero where the gap is below `degeneracy_tol`.
MatrixXd ratio_table(const SpectrumSweep& sweep, int reference_track, const MatrixXd& couplings,
                     double degeneracy_tol = 1e-8);

struct NearestLevels {
  /// Ascending in energy at the first point.
  std::vector<int> tracks;
  VectorXd peak_ratio;
  /// R at `start_point`, the first point where no selected track is degenerate with the reference.
  VectorXd start_ratio;
  Index start_point = 0;
};

/// The `count` tracks without free-mode excitation closest on average to the reference.
NearestLevels nearest_levels(const SpectrumSweep& sweep, int reference_track, const MatrixXd& couplings,
                             int count = 3, double max_free_occupation = 0.5, double degeneracy_tol = 1e-8);

enum class DarkFamily { psi_2plus, psi_2splus };

struct LawCheckConfig {
  ParamsAt params_at;
  ParamsAt rates_at;
  DarkFamily family = DarkFamily::psi_2plus;
  /// Tracks whose closest approach to E = omega is within this are tested for the vanishing law.
  double approach_window = 0.05;
  double relation_floor = 1e-5;  ///< amplitude scale below which the relation is compared absolutely
};

struct TrackApproach {
  int track = 0;
  double min_delta = 0.0;
  double coupling_at_min = 0.0;
  double coupling_max = 0.0;
  bool passed = true;
};

struct LawCheckReport {
  double max_relation_residual = 0.0;
  Index relations_checked = 0;
  std::vector<TrackApproach> approaches;
  int reference_track = -1;
  bool passed() const;
};

/// Checks the two-amplitude relation on |1_b1 down up> and |1_b1 up down>
/// for every eigenstate of the sweep, and the vanishing of the coupling to
/// the dark reference along tracks approaching E = omega.
LawCheckReport matrix_element_law_check(const SpaceSpec& spec, const SpectrumSweep& sweep,
                                        const LawCheckConfig& config);

}  // namespace rabi
