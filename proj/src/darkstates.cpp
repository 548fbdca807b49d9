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

#include "rabi/darkstates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "rabi/spectra.hpp"

namespace rabi {

namespace {

constexpr double kCondTol = 1e-10;

const std::vector<std::pair<DarkStateFamily, const char*>>& family_names() {
  static const std::vector<std::pair<DarkStateFamily, const char*>> names = {
      {DarkStateFamily::psi_d, "psi_d"},
      {DarkStateFamily::psi_2plus, "psi_2plus"},
      {DarkStateFamily::psi_ds, "psi_ds"},
      {DarkStateFamily::psi_2splus, "psi_2splus"},
      {DarkStateFamily::psi_2s_odd_a, "psi_2s_odd_a"},
      {DarkStateFamily::psi_2s_odd_b, "psi_2s_odd_b"},
      {DarkStateFamily::psi_3s_minus, "psi_3s_minus"},
      {DarkStateFamily::psi_N_composite, "psi_N_composite"},
      {DarkStateFamily::phi_K_lifted, "phi_K_lifted"},
      {DarkStateFamily::squeezed_down, "squeezed_down"},
      {DarkStateFamily::nullspace, "nullspace"},
  };
  return names;
}

void require(bool ok, const std::string& constraint, const std::string& detail) {
  if (!ok) throw ConditionError(constraint, detail);
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

void require_qubits(const SpaceSpec& spec, int n) {
  require(spec.n_qubits == n, "N = " + std::to_string(n), "space has " + std::to_string(spec.n_qubits) + " qubits");
}

double common_omega(const ModelParams& p) {
  const double w = p.omega(0);
  require((p.omega.array() - w).abs().maxCoeff() < kCondTol, "omega_i = omega",
          "mode frequencies differ");
  return w;
}

void require_symmetric_coupling(const ModelParams& p, int q0, int q1) {
  const double d = (p.g.col(q0) - p.g.col(q1)).cwiseAbs().maxCoeff();
  require(d < kCondTol, "g_i" + std::to_string(q0 + 1) + " = g_i" + std::to_string(q1 + 1),
          "max difference " + num(d));
}

void require_no_stark(const ModelParams& p) {
  require(!p.has_stark(), "U_ij = 0", "this family belongs to the plain Rabi model");
}

Index ket_index(const BasisTable& basis, std::initializer_list<Spin> spins, const std::vector<int>& photons) {
  BasisLabel l;
  l.spins.assign(spins);
  l.photons = photons;
  return basis.index(l);
}

std::vector<int> photons_one(int modes, int which) {
  std::vector<int> n(static_cast<std::size_t>(modes), 0);
  if (which >= 0) n[static_cast<std::size_t>(which)] = 1;
  return n;
}

// Shared two-qubit even-parity construction:
// sum of D_i-weighted |0 up up> and g_i |1_i>(|dn up> - |up dn>).
Certificate two_qubit_even(const SpaceSpec& spec, const ModelParams& p, DarkStateFamily family) {
  p.validate(spec);
  require_qubits(spec, 2);
  const double w = common_omega(p);
  require(std::abs(p.delta(0) + p.delta(1) - w) < kCondTol, "Delta_1 + Delta_2 = omega",
          "Delta_1 + Delta_2 = " + num(p.delta(0) + p.delta(1)) + ", omega = " + num(w));
  require_symmetric_coupling(p, 0, 1);

  const int m = spec.n_modes;
  VectorXd d(m);
  for (int i = 0; i < m; ++i) d(i) = p.delta(0) - p.delta(1) + p.u(i, 0) - p.u(i, 1);

  const BasisTable basis(spec);
  VectorXc psi = VectorXc::Zero(basis.size());
  const std::vector<int> vac = photons_one(m, -1);
  const bool uniform = (d.array() - d(0)).abs().maxCoeff() < 1e-12;
  if (uniform) {
    psi(ket_index(basis, {Spin::up, Spin::up}, vac)) = d(0);
    for (int i = 0; i < m; ++i) {
      psi(ket_index(basis, {Spin::down, Spin::up}, photons_one(m, i))) = p.g(i, 0);
      psi(ket_index(basis, {Spin::up, Spin::down}, photons_one(m, i))) = -p.g(i, 0);
    }
    if (psi.norm() == 0.0)
      throw SingularError("Delta_1 - Delta_2 + U_i1 - U_i2 != 0 or g != 0",
                          "both the vacuum and the one-photon amplitudes vanish");
  } else {
    psi(ket_index(basis, {Spin::up, Spin::up}, vac)) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (std::abs(d(i)) < 1e-12)
        throw SingularError("Delta_1 - Delta_2 + U_i1 - U_i2 != 0", "zero denominator for mode " + std::to_string(i));
      psi(ket_index(basis, {Spin::down, Spin::up}, photons_one(m, i))) = p.g(i, 0) / d(i);
      psi(ket_index(basis, {Spin::up, Spin::down}, photons_one(m, i))) = -p.g(i, 0) / d(i);
    }
  }
  return certify(spec, p, PureState(psi), w, family);
}

}  // namespace

std::string to_string(DarkStateFamily f) {
  for (const auto& [k, v] : family_names())
    if (k == f) return v;
  return "unknown";
}

DarkStateFamily parse_family(const std::string& name) {
  for (const auto& [k, v] : family_names())
    if (name == v) return k;
  throw ConfigError("unknown dark-state family '" + name + "'");
}

double certificate_residual(const SpaceSpec& spec, const ModelParams& params, const VectorXc& psi,
                            double energy) {
  const BasisTable basis(spec);
  const SparseXd h = assemble_hamiltonian(basis, params);
  VectorXc r = h.cast<cplx>() * psi - energy * psi;
  return r.norm();
}

Certificate certify(const SpaceSpec& spec, const ModelParams& params, PureState state, double energy,
                    DarkStateFamily family) {
  const BasisTable basis(spec);
  if (state.dim() != basis.size()) throw ShapeError("state dimension does not match the space");
  state.normalize();
  state.fix_phase();

  Certificate c;
  c.family = family;
  c.energy = energy;
  c.residual = certificate_residual(spec, params, state.amplitudes(), energy);

  const VectorXc& a = state.amplitudes();
  double pexp = 0.0;
  int nmin = std::numeric_limits<int>::max();
  int nmax = 0;
  for (Index i = 0; i < basis.size(); ++i) {
    const double w = std::norm(a(i));
    pexp += w * basis.parity(i);
    if (std::abs(a(i)) > 1e-10) {
      nmin = std::min(nmin, basis.total_photons(i));
      nmax = std::max(nmax, basis.total_photons(i));
    }
  }
  c.parity = pexp > 0 ? 1 : -1;
  double defect = 0.0;
  for (Index i = 0; i < basis.size(); ++i)
    if (basis.parity(i) != c.parity) defect += std::norm(a(i));
  c.parity_defect = 2.0 * std::sqrt(defect);
  if (c.parity_defect > 1e-10) c.parity = 0;
  c.photon_bound = {nmin == std::numeric_limits<int>::max() ? 0 : nmin, nmax};
  c.state = std::move(state);
  return c;
}

Certificate psi_d(const SpaceSpec& spec, const ModelParams& params) {
  require(spec.n_modes == 1, "M = 1", "psi_d is the single-mode solution");
  require_no_stark(params);
  return two_qubit_even(spec, params, DarkStateFamily::psi_d);
}

Certificate psi_2plus(const SpaceSpec& spec, const ModelParams& params) {
  require_no_stark(params);
  return two_qubit_even(spec, params, DarkStateFamily::psi_2plus);
}

Certificate psi_ds(const SpaceSpec& spec, const ModelParams& params) {
  require(spec.n_modes == 1, "M = 1", "psi_ds is the single-mode solution");
  return two_qubit_even(spec, params, DarkStateFamily::psi_ds);
}

Certificate psi_2splus(const SpaceSpec& spec, const ModelParams& params) {
  return two_qubit_even(spec, params, DarkStateFamily::psi_2splus);
}

Certificate psi_odd_parity(const SpaceSpec& spec, const ModelParams& p, OddVariant variant) {
  p.validate(spec);
  require_qubits(spec, 2);
  const double w = common_omega(p);
  const double e = variant == OddVariant::a ? p.delta(0) - p.delta(1) : p.delta(1) - p.delta(0);
  require(std::abs(e - w) < kCondTol,
          variant == OddVariant::a ? "omega = Delta_1 - Delta_2" : "omega = Delta_2 - Delta_1",
          "omega = " + num(w) + ", qubit energy difference = " + num(e));
  require_symmetric_coupling(p, 0, 1);

  const int m = spec.n_modes;
  const BasisTable basis(spec);
  VectorXc psi = VectorXc::Zero(basis.size());
  const std::vector<int> vac = photons_one(m, -1);
  if (variant == OddVariant::a)
    psi(ket_index(basis, {Spin::up, Spin::down}, vac)) = 1.0;
  else
    psi(ket_index(basis, {Spin::down, Spin::up}, vac)) = 1.0;
  for (int i = 0; i < m; ++i) {
    const double den = p.delta(0) + p.delta(1) + p.u(i, 0) + p.u(i, 1);
    if (std::abs(den) < 1e-12)
      throw SingularError("Delta_1 + Delta_2 + U_i1 + U_i2 != 0", "zero denominator for mode " + std::to_string(i));
    const double wi = p.g(i, 0) / den;
    psi(ket_index(basis, {Spin::down, Spin::down}, photons_one(m, i))) = wi;
    psi(ket_index(basis, {Spin::up, Spin::up}, photons_one(m, i))) = -wi;
  }
  return certify(spec, p, PureState(psi), w,
                 variant == OddVariant::a ? DarkStateFamily::psi_2s_odd_a : DarkStateFamily::psi_2s_odd_b);
}

Certificate psi_3s_minus(const SpaceSpec& spec, const ModelParams& p) {
  p.validate(spec);
  require_qubits(spec, 3);
  const double w = common_omega(p);
  for (int j = 0; j < 3; ++j)
    require(std::abs(p.delta(j) - w) < kCondTol, "Delta_j = omega",
            "Delta_" + std::to_string(j + 1) + " = " + num(p.delta(j)));
  const int m = spec.n_modes;
  for (int i = 0; i < m; ++i) {
    require(std::abs(p.g(i, 0) - p.g(i, 1) - p.g(i, 2)) < kCondTol, "g_i1 = g_i2 + g_i3",
            "mode " + std::to_string(i));
    require(std::abs(p.g(i, 1) * p.g(0, 2) - p.g(i, 2) * p.g(0, 1)) < kCondTol,
            "g_i2 / g_i3 independent of i", "mode " + std::to_string(i));
    for (int j = 0; j < 3; ++j)
      require(std::abs(p.u(i, j) - p.u(0, j)) < kCondTol, "U_ij = U_1j", "mode " + std::to_string(i));
  }
  const double g11 = p.g(0, 0), g12 = p.g(0, 1), g13 = p.g(0, 2);
  const double u11 = p.u(0, 0), u12 = p.u(0, 1), u13 = p.u(0, 2);
  if (std::abs(g12) < 1e-12 || std::abs(g13) < 1e-12)
    throw SingularError("g_12 != 0 and g_13 != 0", "zero divisor in the vacuum amplitudes");

  const double a = (w * g13 - g12 * u11 + g11 * u12) / g12;
  const double b = (w * g12 - g13 * u11 + g11 * u13) / g13;
  const double c = -g11 * (w * g11 + g13 * u12 + g12 * u13) / (g12 * g13);

  const BasisTable basis(spec);
  VectorXc psi = VectorXc::Zero(basis.size());
  const auto vac = photons_one(m, -1);
  const Spin U = Spin::up, D = Spin::down;
  psi(ket_index(basis, {U, U, D}, vac)) = a;
  psi(ket_index(basis, {U, D, U}, vac)) = b;
  psi(ket_index(basis, {D, U, U}, vac)) = c;
  for (int i = 0; i < m; ++i) {
    const auto one = photons_one(m, i);
    const double gi = p.g(i, 0);
    psi(ket_index(basis, {U, D, D}, one)) = gi;
    psi(ket_index(basis, {D, U, D}, one)) = -gi;
    psi(ket_index(basis, {D, D, U}, one)) = -gi;
    psi(ket_index(basis, {U, U, U}, one)) = gi;
  }
  return certify(spec, p, PureState(psi), w, DarkStateFamily::psi_3s_minus);
}

Certificate psi_N_composite(const SpaceSpec& spec, const ModelParams& p, int n_bell) {
  p.validate(spec);
  require(n_bell >= 0, "n_bell >= 0", "negative singlet count");
  require_qubits(spec, 2 + 2 * n_bell);
  for (int k = 0; k < n_bell; ++k) {
    const int qa = 2 + 2 * k, qb = qa + 1;
    require(std::abs(p.delta(qa) - p.delta(qb)) < kCondTol,
            "Delta_" + std::to_string(qa + 1) + " = Delta_" + std::to_string(qb + 1), "singlet pair splittings differ");
    require_symmetric_coupling(p, qa, qb);
    require((p.u.col(qa) - p.u.col(qb)).cwiseAbs().maxCoeff() < kCondTol,
            "U_i" + std::to_string(qa + 1) + " = U_i" + std::to_string(qb + 1), "singlet pair Stark shifts differ");
  }

  const SpaceSpec base_spec{2, spec.n_modes, spec.cutoff};
  ModelParams bp;
  bp.delta = p.delta.head(2);
  bp.omega = p.omega;
  bp.g = p.g.leftCols(2);
  bp.u = p.u.leftCols(2);
  const Certificate base = psi_2splus(base_spec, bp);

  const BasisTable bb(base_spec);
  const BasisTable basis(spec);
  VectorXc psi = VectorXc::Zero(basis.size());
  const double s = 1.0 / std::sqrt(2.0);
  const VectorXc& a = base.state.amplitudes();
  const Index pairs = Index{1} << n_bell;
  for (Index i = 0; i < bb.size(); ++i) {
    if (a(i) == cplx(0.0)) continue;
    const BasisLabel l0 = bb.label(i);
    // Each singlet (|dn up> - |up dn>)/sqrt(2); bit k chooses the branch of pair k.
    for (Index mask = 0; mask < pairs; ++mask) {
      BasisLabel l = l0;
      double amp = 1.0;
      for (int k = 0; k < n_bell; ++k) {
        const bool second = (mask >> k) & 1;
        l.spins.push_back(second ? Spin::up : Spin::down);
        l.spins.push_back(second ? Spin::down : Spin::up);
        amp *= second ? -s : s;
      }
      psi(basis.index(l)) += a(i) * amp;
    }
  }
  return certify(spec, p, PureState(psi), base.energy, DarkStateFamily::psi_N_composite);
}

Certificate phi_K_state(const SpaceSpec& spec, const ModelParams& p, const SpaceSpec& spec_1,
                        const VectorXc& single, double e_single, const std::vector<int>& occupations) {
  p.validate(spec);
  const double w = common_omega(p);
  require(spec_1.n_modes == 1 && spec_1.n_qubits == spec.n_qubits, "single-mode reference",
          "reference space must have one mode and the same qubits");
  const auto dir = common_coupling_pattern(p.g);
  require(dir.has_value(), "g_ij / g_i'j independent of j", "couplings are not column proportional");
  require(static_cast<int>(occupations.size()) == spec.n_modes - 1, "one occupation per free mode",
          "expected " + std::to_string(spec.n_modes - 1) + " occupations");
  int k = 0;
  for (int n : occupations) {
    require(n >= 0, "n_bj >= 0", "negative occupation");
    k += n;
  }
  require(k >= 1, "K >= 1", "at least one free-mode excitation");

  const BasisTable b1(spec_1);
  if (single.size() != b1.size()) throw ShapeError("single-mode eigenvector has the wrong dimension");
  int support = 0;
  for (Index i = 0; i < b1.size(); ++i)
    if (std::abs(single(i)) > 1e-12) support = std::max(support, b1.total_photons(i));
  if (support + k > spec.cutoff)
    throw CapacityError("cutoff " + std::to_string(spec.cutoff) + " too small for K = " + std::to_string(k) +
                        " on top of single-mode support " + std::to_string(support));

  const BogoliubovFrame frame = bogoliubov_frame(*dir);
  const BasisTable basis(spec);
  std::vector<SparseXd> bdag;
  for (int j = 0; j < spec.n_modes; ++j) bdag.emplace_back(sparse_b_operator(basis, frame, j).transpose());

  VectorXd psi = VectorXd::Zero(basis.size());
  for (int n = 0; n <= support; ++n) {
    VectorXd u = VectorXd::Zero(basis.size());
    bool any = false;
    for (Index i = 0; i < b1.size(); ++i) {
      if (b1.total_photons(i) != n || std::abs(single(i)) <= 1e-12) continue;
      BasisLabel l = b1.label(i);
      l.photons.assign(static_cast<std::size_t>(spec.n_modes), 0);
      if (std::abs(single(i).imag()) > 1e-12) throw ShapeError("single-mode eigenvector must be real");
      u(basis.index(l)) = single(i).real();
      any = true;
    }
    if (!any) continue;
    for (int r = 1; r <= n; ++r) u = bdag[0] * u / std::sqrt(static_cast<double>(r));
    psi += u;
  }
  for (int j = 1; j < spec.n_modes; ++j)
    for (int r = 1; r <= occupations[static_cast<std::size_t>(j - 1)]; ++r)
      psi = bdag[static_cast<std::size_t>(j)] * psi / std::sqrt(static_cast<double>(r));
  return certify(spec, p, PureState(psi.cast<cplx>()), e_single + k * w, DarkStateFamily::phi_K_lifted);
}

Certificate squeezed_dark_state(const SpaceSpec& spec, const ModelParams& p, double xi) {
  p.validate(spec);
  for (int i = 0; i < spec.n_modes; ++i)
    require(std::abs(p.omega(i) - p.u.row(i).sum()) < kCondTol, "omega_i = sum_j U_ij",
            "mode " + std::to_string(i));
  require(spec.cutoff % 2 == 0, "even cutoff", "cutoff " + std::to_string(spec.cutoff));
  require(spec.cutoff >= 20, "cutoff >= 20", "cutoff " + std::to_string(spec.cutoff));
  require(xi > 0.0, "xi > 0", "squeezing must be positive");

  const Index levels = spec.levels();
  const double t = std::isinf(xi) ? 1.0 : std::tanh(xi);
  VectorXd mode = VectorXd::Zero(levels);
  // c_{2n} = (-t)^n sqrt((2n)!) / (2^n n!), built by the ratio c_{2n+2}/c_{2n}.
  mode(0) = 1.0;
  for (Index n = 0; 2 * n + 2 < levels; ++n)
    mode(2 * n + 2) = -t * mode(2 * n) * std::sqrt((2.0 * n + 1.0) / (2.0 * n + 2.0));
  mode.normalize();

  const BasisTable basis(spec);
  VectorXd psi = VectorXd::Zero(basis.size());
  for (Index i = 0; i < basis.size(); ++i) {
    bool all_down = true;
    for (int j = 0; j < spec.n_qubits && all_down; ++j) all_down = basis.digit(i, j) == 1;
    if (!all_down) continue;
    double amp = 1.0;
    for (int m = 0; m < spec.n_modes; ++m) amp *= mode(basis.digit(i, spec.n_qubits + m));
    psi(i) = amp;
  }
  const double e = -p.delta.sum();
  Certificate c = certify(spec, p, PureState(psi.cast<cplx>()), e, DarkStateFamily::squeezed_down);

  const SpaceSpec wide{spec.n_qubits, spec.n_modes, spec.cutoff + 1};
  const BasisTable wb(wide);
  c.untruncated_residual = certificate_residual(wide, p, change_cutoff(basis, c.state.amplitudes(), wb), e);
  return c;
}

std::vector<double> nullspace_candidate_energies(const ModelParams& p) {
  std::vector<double> es;
  const int n = p.n_qubits();
  for (int mask = 0; mask < (1 << n); ++mask) {
    double e = 0.0;
    for (int j = 0; j < n; ++j) e += ((mask >> j) & 1 ? -1.0 : 1.0) * p.delta(j);
    es.push_back(e);
  }
  for (int i = 0; i < p.n_modes(); ++i) es.push_back(p.omega(i));
  std::sort(es.begin(), es.end());
  std::vector<double> out;
  for (double e : es)
    if (out.empty() || std::abs(e - out.back()) > 1e-12) out.push_back(e);
  return out;
}

std::vector<Certificate> one_photon_nullspace(const SpaceSpec& spec, const ModelParams& p, int parity,
                                              std::optional<double> energy) {
  p.validate(spec);
  if (parity != 1 && parity != -1) throw ShapeError("parity must be +1 or -1");
  const SpaceSpec work{spec.n_qubits, spec.n_modes, 2};
  const BasisTable wb(work);
  const SparseXd h = assemble_hamiltonian(wb, p);

  std::vector<Index> cols, rows;
  for (Index i = 0; i < wb.size(); ++i) {
    if (wb.total_photons(i) <= 2 && wb.parity(i) == parity) rows.push_back(i);
    if (wb.total_photons(i) <= 1 && wb.parity(i) == parity) cols.push_back(i);
  }
  const MatrixXd hd = MatrixXd(h);
  MatrixXd a(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) a(static_cast<Index>(r), static_cast<Index>(c)) = hd(rows[r], cols[c]);

  std::vector<double> energies = nullspace_candidate_energies(p);
  if (energy && std::none_of(energies.begin(), energies.end(), [&](double e) { return std::abs(e - *energy) < 1e-12; }))
    energies.push_back(*energy);

  const BasisTable target(spec);
  std::vector<Certificate> out;
  for (double e : energies) {
    MatrixXd m = a;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto r = std::find(rows.begin(), rows.end(), cols[c]) - rows.begin();
      m(r, static_cast<Index>(c)) -= e;
    }
    Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    for (Index k = 0; k < static_cast<Index>(cols.size()); ++k) {
      const double s = k < sv.size() ? sv(k) : 0.0;
      if (s >= 1e-10) continue;
      VectorXc full = VectorXc::Zero(wb.size());
      for (std::size_t c = 0; c < cols.size(); ++c) full(cols[c]) = svd.matrixV()(static_cast<Index>(c), k);
      VectorXc psi = change_cutoff(wb, full, target);
      out.push_back(certify(spec, p, PureState(psi), e, DarkStateFamily::nullspace));
    }
  }
  return out;
}

std::string format_label(const BasisLabel& l) {
  std::ostringstream os;
  os << '|';
  for (std::size_t i = 0; i < l.photons.size(); ++i) os << (i ? " " : "") << l.photons[i];
  os << ';';
  for (Spin s : l.spins) os << ' ' << (s == Spin::up ? "up" : "dn");
  os << '>';
  return os.str();
}

std::string to_record(const Certificate& c, const SpaceSpec& spec) {
  const BasisTable basis(spec);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "family=" << to_string(c.family) << '\n';
  os << "energy=" << c.energy << '\n';
  os << "residual=" << c.residual << '\n';
  os << "parity=" << c.parity << '\n';
  os << "photon_bound=" << c.photon_bound.first << ',' << c.photon_bound.second << '\n';
  if (!std::isnan(c.untruncated_residual)) os << "untruncated_residual=" << c.untruncated_residual << '\n';
  os << "index,label,re,im\n";
  const VectorXc& a = c.state.amplitudes();
  for (Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i)) <= 1e-12) continue;
    os << i << ',' << format_label(basis.label(i)) << ',' << a(i).real() << ',' << a(i).imag() << '\n';
  }
  return os.str();
}

}  // namespace rabi
