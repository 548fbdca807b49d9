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

#include "rabi/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rabi {

namespace {

Index checked_pow(Index base, int exp) {
  Index r = 1;
  for (int k = 0; k < exp; ++k) {
    if (r > std::numeric_limits<Index>::max() / base) return std::numeric_limits<Index>::max();
    r *= base;
  }
  return r;
}

void check_mode(const SpaceSpec& spec, int mode) {
  if (mode < 0 || mode >= spec.n_modes)
    throw ShapeError("mode index " + std::to_string(mode) + " out of range [0, " +
                     std::to_string(spec.n_modes) + ")");
}

void check_qubit(const SpaceSpec& spec, int qubit) {
  if (qubit < 0 || qubit >= spec.n_qubits)
    throw ShapeError("qubit index " + std::to_string(qubit) + " out of range [0, " +
                     std::to_string(spec.n_qubits) + ")");
}

BasisTable dense_table(const SpaceSpec& spec) {
  require_dense(spec);
  return BasisTable(spec);
}

MatrixXd local_annihilator(Index levels) {
  MatrixXd a = MatrixXd::Zero(levels, levels);
  for (Index n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

MatrixXd local_pauli_real(Axis axis) {
  MatrixXd s = MatrixXd::Zero(2, 2);
  switch (axis) {
    case Axis::x:
      s(0, 1) = s(1, 0) = 1.0;
      break;
    case Axis::z:
      s(0, 0) = 1.0;
      s(1, 1) = -1.0;
      break;
    case Axis::y:
      throw ShapeError("sigma_y has no real representation");
  }
  return s;
}

Operator to_operator(const SparseXd& m, bool hermitian) {
  return Operator(MatrixXd(m).cast<cplx>(), hermitian);
}

}  // namespace

Index SpaceSpec::qubit_dim() const { return checked_pow(2, n_qubits); }
Index SpaceSpec::photon_dim() const { return checked_pow(levels(), n_modes); }

Index SpaceSpec::dim() const {
  const Index q = qubit_dim();
  const Index p = photon_dim();
  if (p != 0 && q > std::numeric_limits<Index>::max() / p) return std::numeric_limits<Index>::max();
  return q * p;
}

int BasisLabel::total_photons() const {
  int n = 0;
  for (int p : photons) n += p;
  return n;
}

int BasisLabel::parity() const {
  int flips = total_photons();
  for (Spin s : spins) flips += s == Spin::down ? 1 : 0;
  return flips % 2 == 0 ? 1 : -1;
}

BasisTable::BasisTable(const SpaceSpec& spec, std::size_t capacity) : spec_(spec) {
  if (spec.n_qubits < 1) throw ShapeError("n_qubits must be positive");
  if (spec.n_modes < 1) throw ShapeError("n_modes must be positive");
  if (spec.cutoff < 1) throw ShapeError("cutoff must be at least 1");
  dim_ = spec.dim();
  if (static_cast<std::size_t>(dim_) > capacity)
    throw CapacityError("Hilbert space dimension " +
                        (dim_ == std::numeric_limits<Index>::max() ? std::string("(overflow)")
                                                                   : std::to_string(dim_)) +
                        " exceeds capacity " + std::to_string(capacity));

  const int nf = spec.n_factors();
  strides_.assign(static_cast<std::size_t>(nf), 1);
  for (int f = nf - 2; f >= 0; --f)
    strides_[static_cast<std::size_t>(f)] = strides_[static_cast<std::size_t>(f + 1)] * factor_size(f + 1);

  total_photons_.resize(static_cast<std::size_t>(dim_));
  parity_.resize(static_cast<std::size_t>(dim_));
  for (Index i = 0; i < dim_; ++i) {
    int downs = 0;
    int n = 0;
    for (int q = 0; q < spec.n_qubits; ++q) downs += digit(i, q);
    for (int m = 0; m < spec.n_modes; ++m) n += digit(i, spec.n_qubits + m);
    total_photons_[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(n);
    parity_[static_cast<std::size_t>(i)] = (n + downs) % 2 == 0 ? 1 : -1;
  }
}

BasisLabel BasisTable::label(Index i) const {
  if (i < 0 || i >= dim_) throw ShapeError("basis index out of range");
  BasisLabel l;
  for (int q = 0; q < spec_.n_qubits; ++q) l.spins.push_back(static_cast<Spin>(digit(i, q)));
  for (int m = 0; m < spec_.n_modes; ++m) l.photons.push_back(digit(i, spec_.n_qubits + m));
  return l;
}

Index BasisTable::index(const BasisLabel& label) const {
  if (static_cast<int>(label.spins.size()) != spec_.n_qubits ||
      static_cast<int>(label.photons.size()) != spec_.n_modes)
    throw ShapeError("basis label has wrong number of factors");
  Index i = 0;
  for (int q = 0; q < spec_.n_qubits; ++q)
    i += static_cast<Index>(label.spins[static_cast<std::size_t>(q)]) * stride(q);
  for (int m = 0; m < spec_.n_modes; ++m) {
    const int n = label.photons[static_cast<std::size_t>(m)];
    if (n < 0 || n > spec_.cutoff) throw ShapeError("photon number outside [0, cutoff]");
    i += n * stride(spec_.n_qubits + m);
  }
  return i;
}

Spin BasisTable::spin(Index i, int qubit) const {
  check_qubit(spec_, qubit);
  return static_cast<Spin>(digit(i, qubit));
}

int BasisTable::photons(Index i, int mode) const {
  check_mode(spec_, mode);
  return digit(i, spec_.n_qubits + mode);
}

std::vector<Index> BasisTable::sector(int parity) const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(dim_ / 2 + 1));
  for (Index i = 0; i < dim_; ++i)
    if (parity_[static_cast<std::size_t>(i)] == parity) out.push_back(i);
  return out;
}

BasisTable build_space(const SpaceSpec& spec, std::size_t capacity) {
  return BasisTable(spec, capacity);
}

void require_dense(const SpaceSpec& spec) {
  const Index d = spec.dim();
  if (d > kDenseLimit)
    throw CapacityError("dense operator of dimension " + std::to_string(d) +
                        " exceeds the dense limit " + std::to_string(kDenseLimit));
}

PureState PureState::normalized(VectorXc amplitudes) {
  PureState s(std::move(amplitudes));
  s.normalize();
  return s;
}

PureState& PureState::normalize() {
  const double n = psi_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ShapeError("cannot normalize a zero or non-finite state");
  psi_ /= n;
  return *this;
}

PureState& PureState::fix_phase() {
  if (psi_.size() == 0) return *this;
  Index k = 0;
  psi_.cwiseAbs().maxCoeff(&k);
  const double mag = std::abs(psi_(k));
  if (mag > 0.0) psi_ *= std::conj(psi_(k)) / mag;
  psi_(k) = cplx(psi_(k).real(), 0.0);
  return *this;
}

cplx PureState::overlap(const PureState& other) const {
  if (other.dim() != dim()) throw ShapeError("state dimensions differ");
  return psi_.dot(other.psi_);
}

PureState basis_state(const BasisTable& basis, const BasisLabel& label) {
  VectorXc v = VectorXc::Zero(basis.size());
  v(basis.index(label)) = 1.0;
  return PureState(std::move(v));
}

VectorXc change_cutoff(const BasisTable& from, const VectorXc& psi, const BasisTable& to) {
  const SpaceSpec& a = from.spec();
  const SpaceSpec& b = to.spec();
  if (a.n_qubits != b.n_qubits || a.n_modes != b.n_modes) throw ShapeError("spaces differ beyond the cutoff");
  if (psi.size() != from.size()) throw ShapeError("state does not match the source space");
  VectorXc out = VectorXc::Zero(to.size());
  for (Index i = 0; i < from.size(); ++i) {
    if (psi(i) == cplx(0.0)) continue;
    BasisLabel l = from.label(i);
    bool fits = true;
    for (int n : l.photons) fits = fits && n <= b.cutoff;
    if (fits) {
      out(to.index(l)) = psi(i);
    } else if (std::abs(psi(i)) > 1e-14) {
      throw ShapeError("state has weight above the target cutoff");
    }
  }
  return out;
}

double fidelity(const VectorXc& a, const VectorXc& b) { return std::norm(a.dot(b)); }

SparseXd sparse_annihilator(const BasisTable& basis, int mode) {
  check_mode(basis.spec(), mode);
  return embed<double>(basis, basis.spec().n_qubits + mode, local_annihilator(basis.spec().levels()));
}

SparseXd sparse_number(const BasisTable& basis, int mode) {
  check_mode(basis.spec(), mode);
  const MatrixXd a = local_annihilator(basis.spec().levels());
  return embed<double>(basis, basis.spec().n_qubits + mode, a.transpose() * a);
}

SparseXd sparse_pauli(const BasisTable& basis, int qubit, Axis axis) {
  check_qubit(basis.spec(), qubit);
  return embed<double>(basis, qubit, local_pauli_real(axis));
}

SparseXd sparse_lowering(const BasisTable& basis, int qubit) {
  check_qubit(basis.spec(), qubit);
  MatrixXd s = MatrixXd::Zero(2, 2);
  s(1, 0) = 1.0;
  return embed<double>(basis, qubit, s);
}

Operator identity(const SpaceSpec& spec) {
  const BasisTable basis = dense_table(spec);
  return Operator(MatrixXc::Identity(basis.size(), basis.size()), true);
}

Operator annihilator(const SpaceSpec& spec, int mode) {
  return to_operator(sparse_annihilator(dense_table(spec), mode), false);
}

Operator creator(const SpaceSpec& spec, int mode) { return annihilator(spec, mode).adjoint(); }

Operator number(const SpaceSpec& spec, int mode) {
  return to_operator(sparse_number(dense_table(spec), mode), true);
}

Operator pauli(const SpaceSpec& spec, int qubit, Axis axis) {
  const BasisTable basis = dense_table(spec);
  check_qubit(spec, qubit);
  if (axis != Axis::y) return to_operator(sparse_pauli(basis, qubit, axis), true);
  MatrixXc sy = MatrixXc::Zero(2, 2);
  sy(0, 1) = cplx(0.0, -1.0);
  sy(1, 0) = cplx(0.0, 1.0);
  return Operator(MatrixXc(embed<cplx>(basis, qubit, sy)), true);
}

Operator lowering(const SpaceSpec& spec, int qubit) {
  return to_operator(sparse_lowering(dense_table(spec), qubit), false);
}

Operator parity_operator(const SpaceSpec& spec) {
  const BasisTable basis = dense_table(spec);
  VectorXc d(basis.size());
  for (Index i = 0; i < basis.size(); ++i) d(i) = static_cast<double>(basis.parity(i));
  return Operator(MatrixXc(d.asDiagonal()), true);
}

SparseXd restrict_to(const SparseXd& m, const std::vector<Index>& indices) {
  std::vector<Index> pos(static_cast<std::size_t>(m.cols()), -1);
  for (std::size_t k = 0; k < indices.size(); ++k) pos[static_cast<std::size_t>(indices[k])] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    for (SparseXd::InnerIterator it(m, indices[k]); it; ++it) {
      const Index c = pos[static_cast<std::size_t>(it.col())];
      if (c >= 0) trips.emplace_back(static_cast<Index>(k), c, it.value());
    }
  }
  const auto n = static_cast<Index>(indices.size());
  SparseXd out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

std::vector<Index> states_with_total_photons_at_most(const BasisTable& basis, int max_total) {
  std::vector<Index> out;
  for (Index i = 0; i < basis.size(); ++i)
    if (basis.total_photons(i) <= max_total) out.push_back(i);
  return out;
}

std::vector<Index> states_below_cutoff(const BasisTable& basis) {
  std::vector<Index> out;
  const auto& spec = basis.spec();
  for (Index i = 0; i < basis.size(); ++i) {
    bool ok = true;
    for (int m = 0; m < spec.n_modes && ok; ++m) ok = basis.photons(i, m) < spec.cutoff;
    if (ok) out.push_back(i);
  }
  return out;
}

double commutator_norm_on(const MatrixXc& a, const MatrixXc& b, const std::vector<Index>& columns) {
  double worst = 0.0;
  for (Index c : columns) {
    const VectorXc col = a * b.col(c) - b * a.col(c);
    worst = std::max(worst, max_abs(col));
  }
  return worst;
}

}  // namespace rabi
