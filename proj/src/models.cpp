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

#include "rabi/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rabi/spectra.hpp"

namespace rabi {

namespace {

bool all_finite(const MatrixXd& m) { return m.size() == 0 || m.allFinite(); }

std::string shape_str(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

ModelParams ModelParams::zeros(const SpaceSpec& spec) {
  ModelParams p;
  p.delta = VectorXd::Zero(spec.n_qubits);
  p.omega = VectorXd::Ones(spec.n_modes);
  p.g = MatrixXd::Zero(spec.n_modes, spec.n_qubits);
  p.u = MatrixXd::Zero(spec.n_modes, spec.n_qubits);
  return p;
}

void ModelParams::check_shapes(const SpaceSpec& spec) const {
  if (delta.size() != spec.n_qubits)
    throw ShapeError("delta has length " + std::to_string(delta.size()) + ", expected " +
                     std::to_string(spec.n_qubits));
  if (omega.size() != spec.n_modes)
    throw ShapeError("omega has length " + std::to_string(omega.size()) + ", expected " +
                     std::to_string(spec.n_modes));
  if (g.rows() != spec.n_modes || g.cols() != spec.n_qubits)
    throw ShapeError("g is " + shape_str(g.rows(), g.cols()) + ", expected " +
                     shape_str(spec.n_modes, spec.n_qubits));
  if (u.rows() != spec.n_modes || u.cols() != spec.n_qubits)
    throw ShapeError("u is " + shape_str(u.rows(), u.cols()) + ", expected " +
                     shape_str(spec.n_modes, spec.n_qubits));
}

void ModelParams::validate(const SpaceSpec& spec) const {
  check_shapes(spec);
  if (!all_finite(delta) || !all_finite(omega) || !all_finite(g) || !all_finite(u))
    throw ShapeError("model parameters must be finite");
  if ((omega.array() <= 0.0).any()) throw ShapeError("mode frequencies must be positive");
}

SparseXd assemble_hamiltonian(const BasisTable& basis, const ModelParams& p) {
  const SpaceSpec& spec = basis.spec();
  p.check_shapes(spec);
  const int nq = spec.n_qubits;
  const int nm = spec.n_modes;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(basis.size()) * static_cast<std::size_t>(1 + 2 * nq * nm));

  std::vector<double> s(static_cast<std::size_t>(nq));
  for (Index c = 0; c < basis.size(); ++c) {
    double diag = 0.0;
    for (int j = 0; j < nq; ++j) {
      s[static_cast<std::size_t>(j)] = basis.digit(c, j) == 0 ? 1.0 : -1.0;
      diag += p.delta(j) * s[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < nm; ++i) {
      const int n = basis.digit(c, nq + i);
      if (n == 0) continue;
      double w = p.omega(i);
      for (int j = 0; j < nq; ++j) w += p.u(i, j) * s[static_cast<std::size_t>(j)];
      diag += w * n;
    }
    if (diag != 0.0) trips.emplace_back(c, c, diag);

    for (int i = 0; i < nm; ++i) {
      const int n = basis.digit(c, nq + i);
      const Index ms = basis.stride(nq + i);
      for (int j = 0; j < nq; ++j) {
        const double gij = p.g(i, j);
        if (gij == 0.0) continue;
        const Index flipped = c + (basis.digit(c, j) == 0 ? 1 : -1) * basis.stride(j);
        if (n < spec.cutoff) trips.emplace_back(flipped + ms, c, gij * std::sqrt(n + 1.0));
        if (n > 0) trips.emplace_back(flipped - ms, c, gij * std::sqrt(static_cast<double>(n)));
      }
    }
  }
  SparseXd h(basis.size(), basis.size());
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

Operator hamiltonian_mqrm(const SpaceSpec& spec, const ModelParams& params) {
  params.validate(spec);
  if (params.has_stark())
    throw ConditionError("U_ij = 0", "the plain Rabi model takes no Stark terms");
  return hamiltonian_rabi_stark(spec, params);
}

Operator hamiltonian_rabi_stark(const SpaceSpec& spec, const ModelParams& params) {
  params.validate(spec);
  require_dense(spec);
  const BasisTable basis(spec);
  return Operator(MatrixXd(assemble_hamiltonian(basis, params)).cast<cplx>(), true);
}

BogoliubovFrame bogoliubov_frame(const VectorXd& g) {
  const Index m = g.size();
  if (m == 0) throw ShapeError("empty coupling vector");
  const double norm = g.norm();
  if (!(norm > 0.0)) throw ConditionError("some g_i != 0", "all-zero coupling vector");

  BogoliubovFrame f;
  f.g_norm = norm;
  f.coeffs = MatrixXd::Zero(m, m);
  f.coeffs.row(0) = g.transpose() / norm;

  std::vector<bool> filled(static_cast<std::size_t>(m), false);
  filled[0] = true;
  double partial = g(0) * g(0);
  for (Index j = 1; j < m; ++j) {
    const double next = partial + g(j) * g(j);
    if (partial > 0.0) {
      for (Index i = 0; i < j; ++i) f.coeffs(j, i) = g(i) * g(j);
      f.coeffs(j, j) = -partial;
      f.coeffs.row(j) /= std::sqrt(next * partial);
      filled[static_cast<std::size_t>(j)] = true;
    }
    partial = next;
  }

  // Rows left undefined by vanishing leading couplings: Gram-Schmidt on the
  // canonical basis against every row already present.
  Index e = 0;
  for (Index j = 1; j < m; ++j) {
    if (filled[static_cast<std::size_t>(j)]) continue;
    for (; e < m; ++e) {
      VectorXd v = VectorXd::Unit(m, e);
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = 0; k < m; ++k)
          if (filled[static_cast<std::size_t>(k)]) v -= f.coeffs.row(k).dot(v) * f.coeffs.row(k).transpose();
      if (v.norm() > 1e-8) {
        f.coeffs.row(j) = v.normalized().transpose();
        filled[static_cast<std::size_t>(j)] = true;
        ++e;
        break;
      }
    }
  }
  return f;
}

std::optional<VectorXd> common_coupling_pattern(const MatrixXd& g, double tol) {
  if (g.size() == 0) return std::nullopt;
  Index best = 0;
  g.colwise().norm().maxCoeff(&best);
  const VectorXd ref = g.col(best);
  const double rn = ref.norm();
  if (!(rn > 0.0)) return std::nullopt;
  const VectorXd dir = ref / rn;
  for (Index j = 0; j < g.cols(); ++j) {
    const VectorXd c = g.col(j);
    if ((c - c.dot(dir) * dir).norm() > tol * std::max(1.0, c.norm())) return std::nullopt;
  }
  return dir;
}

SparseXd sparse_b_operator(const BasisTable& basis, const BogoliubovFrame& frame, int j) {
  const int m = basis.spec().n_modes;
  if (frame.n_modes() != m) throw ShapeError("frame size does not match the mode count");
  if (j < 0 || j >= m) throw ShapeError("Bogoliubov mode index out of range");
  SparseXd b(basis.size(), basis.size());
  for (int i = 0; i < m; ++i)
    if (frame.coeffs(j, i) != 0.0) b += frame.coeffs(j, i) * sparse_annihilator(basis, i);
  return b;
}

SparseXd sparse_free_mode_number(const BasisTable& basis, const BogoliubovFrame& frame) {
  SparseXd n(basis.size(), basis.size());
  for (int j = 1; j < basis.spec().n_modes; ++j) {
    const SparseXd b = sparse_b_operator(basis, frame, j);
    n += SparseXd(b.transpose() * b);
  }
  return n;
}

Operator b_operator(const SpaceSpec& spec, const BogoliubovFrame& frame, int j) {
  require_dense(spec);
  const BasisTable basis(spec);
  return Operator(MatrixXd(sparse_b_operator(basis, frame, j)).cast<cplx>(), false);
}

Operator b_number_operator(const SpaceSpec& spec, const BogoliubovFrame& frame, int j) {
  if (j < 1 || j >= spec.n_modes)
    throw ShapeError("free Bogoliubov mode index must lie in [1, n_modes)");
  require_dense(spec);
  const BasisTable basis(spec);
  const SparseXd b = sparse_b_operator(basis, frame, j);
  MatrixXd n = MatrixXd(SparseXd(b.transpose() * b));
  n = 0.5 * (n + n.transpose());
  return Operator(n.cast<cplx>(), true);
}

namespace {

// Effective single-mode couplings: projection of each qubit column on the bright mode.
VectorXd bright_couplings(const MatrixXd& g, const VectorXd& dir) { return g.transpose() * dir; }

bool nearest_level(const VectorXd& energies, const std::vector<int>& parity, int want, double target,
                   MatchedLevel& out) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (Index k = 0; k < energies.size(); ++k) {
    if (parity[static_cast<std::size_t>(k)] != want) continue;
    const double d = std::abs(energies(k) - target);
    if (d < best) {
      best = d;
      out.energy_single = energies(k);
      found = true;
    }
  }
  return found;
}

}  // namespace

ModelParams single_mode_reduction(const ModelParams& p) {
  constexpr double tol = 1e-10;
  const double w = p.omega(0);
  if ((p.omega.array() - w).abs().maxCoeff() > tol) throw ConditionError("omega_i equal", "mode frequencies differ");
  for (Index j = 0; j < p.u.cols(); ++j)
    if ((p.u.col(j).array() - p.u(0, j)).abs().maxCoeff() > tol)
      throw ConditionError("U_ij = U_j", "Stark shifts depend on the mode");
  ModelParams r;
  r.delta = p.delta;
  r.omega = VectorXd::Constant(1, w);
  r.u = p.u.topRows(1);
  const auto dir = common_coupling_pattern(p.g);
  if (!dir) {
    if (p.g.cwiseAbs().maxCoeff() > 0.0)
      throw ConditionError("g_ij / g_i'j independent of j", "couplings are not column proportional");
    r.g = MatrixXd::Zero(1, p.g.cols());
    return r;
  }
  r.g = bright_couplings(p.g, *dir).transpose();
  return r;
}

SpectrumEquivalenceReport spectrum_equivalence_report(const SpaceSpec& spec_m,
                                                      const ModelParams& params_m,
                                                      const SpaceSpec& spec_1,
                                                      const ModelParams& params_1,
                                                      const EquivalenceOptions& options) {
  params_m.validate(spec_m);
  params_1.validate(spec_1);
  constexpr double tol = 1e-10;
  if (spec_1.n_modes != 1) throw ShapeError("reference model must have a single mode");
  if (spec_m.n_qubits != spec_1.n_qubits) throw ShapeError("qubit counts differ");

  const double w = params_1.omega(0);
  if ((params_m.omega.array() - w).abs().maxCoeff() > tol)
    throw ConditionError("omega_i equal", "mode frequencies differ between or within the models");
  if ((params_m.delta - params_1.delta).cwiseAbs().maxCoeff() > tol)
    throw ConditionError("Delta_j equal", "qubit splittings differ");
  for (int j = 0; j < spec_m.n_qubits; ++j) {
    const double sm = params_m.g.col(j).squaredNorm();
    const double s1 = params_1.g(0, j) * params_1.g(0, j);
    if (std::abs(sm - s1) > tol)
      throw ConditionError("sum_i g_ij^2 equal", "qubit " + std::to_string(j) + ": " +
                                                     std::to_string(sm) + " vs " + std::to_string(s1));
    const VectorXd uc = params_m.u.col(j);
    if ((uc.array() - params_1.u(0, j)).abs().maxCoeff() > tol)
      throw ConditionError("U_ij = U_j", "Stark shifts must be mode independent and match");
  }

  BogoliubovFrame frame;
  if (spec_m.n_modes > 1) {
    auto dir = common_coupling_pattern(params_m.g);
    if (!dir && params_m.g.cwiseAbs().maxCoeff() == 0.0) dir = VectorXd::Ones(spec_m.n_modes).normalized();
    if (!dir) throw ConditionError("g_ij / g_i'j independent of j", "couplings are not column proportional");
    const VectorXd c = bright_couplings(params_m.g, *dir);
    const VectorXd c1 = params_1.g.row(0).transpose();
    if ((c - c1).cwiseAbs().maxCoeff() > 1e-8 && (c + c1).cwiseAbs().maxCoeff() > 1e-8)
      throw ConditionError("bright-mode couplings equal", "relative coupling signs differ");
    frame = bogoliubov_frame(*dir);
  } else {
    frame = bogoliubov_frame(VectorXd::Ones(1));
  }

  const BasisTable basis_1(spec_1);
  const EigenSystem es1 = eigensystem(basis_1, assemble_hamiltonian(basis_1, params_1), Sector::full);

  const BasisTable basis_m(spec_m);
  const SparseXd nb = sparse_free_mode_number(basis_m, frame);
  const SparseXd hm = assemble_hamiltonian(basis_m, params_m);

  SpectrumEquivalenceReport rep;
  const std::vector<Sector> sectors =
      options.sector == 0 ? std::vector<Sector>{Sector::even, Sector::odd}
                          : std::vector<Sector>{options.sector > 0 ? Sector::even : Sector::odd};
  for (Sector sec : sectors) {
    const int par = sector_parity(sec);
    EigenSystem es = eigensystem(basis_m, hm, sec);
    // Resolve degenerate clusters so every state carries a definite free-mode number.
    VectorXd labels(es.size());
    Index k = 0;
    while (k < es.size()) {
      Index end = k + 1;
      while (end < es.size() && es.energies(end) - es.energies(end - 1) < 1e-8) ++end;
      const MatrixXc block = es.states.middleCols(k, end - k);
      MatrixXc nbk = block.adjoint() * (nb * block);
      nbk = 0.5 * (nbk + nbk.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<MatrixXc> sol(nbk);
      es.states.middleCols(k, end - k) = block * sol.eigenvectors();
      labels.segment(k, end - k) = sol.eigenvalues();
      k = end;
    }

    for (Index n = 0; n < es.size(); ++n) {
      const double e = es.energies(n);
      if (e > options.energy_window) continue;
      const int kk = static_cast<int>(std::lround(labels(n)));
      rep.max_label_defect = std::max(rep.max_label_defect, std::abs(labels(n) - kk));
      MatchedLevel m;
      m.energy_multi = e;
      m.parity = par;
      if (kk == 0) {
        if (nearest_level(es1.energies, es1.parity, par, e, m)) {
          rep.matched.push_back(m);
          rep.max_matched_discrepancy = std::max(rep.max_matched_discrepancy, m.discrepancy());
        }
      } else {
        const int partner_parity = kk % 2 == 0 ? par : -par;
        if (nearest_level(es1.energies, es1.parity, partner_parity, e - kk * w, m)) {
          ExtraLevel x;
          x.energy = e;
          x.k = kk;
          x.nb_total = labels(n);
          x.partner_energy = m.energy_single;
          x.offset_error = std::abs(e - m.energy_single - kk * w);
          rep.extra.push_back(x);
          rep.max_offset_error = std::max(rep.max_offset_error, x.offset_error);
        }
      }
    }

    for (Index n = 0; n < es1.size(); ++n) {
      if (es1.parity[static_cast<std::size_t>(n)] != par || es1.energies(n) > options.energy_window)
        continue;
      const bool hit = std::any_of(rep.matched.begin(), rep.matched.end(), [&](const MatchedLevel& m) {
        return m.parity == par && std::abs(m.energy_single - es1.energies(n)) < 1e-12;
      });
      if (!hit) ++rep.unmatched_single;
    }
  }
  return rep;
}

}  // namespace rabi
