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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rabi/types.hpp"

namespace rabi {

inline constexpr std::size_t kDefaultCapacity = std::size_t{1} << 20;

/// Composite qubit-boson space.
///
/// Basis ordering: qubit factors first, then mode factors, each group in
/// ascending index, row-major.  Qubit local state 0 is spin up, so
/// sigma_z |up> = +|up>.  Mode local state n is the Fock state |n>, n <= cutoff.
/// All qubit and mode indices in this library are zero based.
struct SpaceSpec {
  int n_qubits = 1;
  int n_modes = 1;
  int cutoff = 1;

  Index levels() const { return cutoff + 1; }
  Index qubit_dim() const;
  Index photon_dim() const;
  Index dim() const;
  int n_factors() const { return n_qubits + n_modes; }
  bool operator==(const SpaceSpec&) const = default;
};

enum class Spin : std::uint8_t { up = 0, down = 1 };
enum class Axis { x, y, z };

struct BasisLabel {
  std::vector<Spin> spins;
  std::vector<int> photons;

  int total_photons() const;
  int parity() const;
  bool operator==(const BasisLabel&) const = default;
};

/// Index <-> label table for a SpaceSpec.  Immutable after construction.
class BasisTable {
 public:
  explicit BasisTable(const SpaceSpec& spec, std::size_t capacity = kDefaultCapacity);

  const SpaceSpec& spec() const { return spec_; }
  Index size() const { return dim_; }

  BasisLabel label(Index i) const;
  Index index(const BasisLabel& label) const;

  Spin spin(Index i, int qubit) const;
  int photons(Index i, int mode) const;
  int total_photons(Index i) const { return total_photons_[static_cast<std::size_t>(i)]; }
  int parity(Index i) const { return parity_[static_cast<std::size_t>(i)]; }

  /// Basis indices with the given parity, ascending.
  std::vector<Index> sector(int parity) const;

  Index stride(int factor) const { return strides_[static_cast<std::size_t>(factor)]; }
  Index factor_size(int factor) const { return factor < spec_.n_qubits ? 2 : spec_.levels(); }
  int digit(Index i, int factor) const {
    return static_cast<int>((i / stride(factor)) % factor_size(factor));
  }

 private:
  SpaceSpec spec_;
  Index dim_ = 0;
  std::vector<Index> strides_;
  std::vector<std::int16_t> total_photons_;
  std::vector<std::int8_t> parity_;
};

/// Validates the spec and returns the basis table.
/// Throws CapacityError when the dimension exceeds `capacity`.
BasisTable build_space(const SpaceSpec& spec, std::size_t capacity = kDefaultCapacity);

/// Largest dimension for which dense operators are materialized.
inline constexpr Index kDenseLimit = 6144;
/// Throws CapacityError when a dense operator over `spec` would exceed kDenseLimit.
void require_dense(const SpaceSpec& spec);

/// Dense square matrix with a Hermiticity flag.
template <typename Scalar>
class BasicOperator {
 public:
  using MatrixType = Matrix<Scalar>;
  static constexpr double kHermitianTol = 1e-12;

  BasicOperator() = default;
  BasicOperator(MatrixType m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
    if (m_.rows() != m_.cols()) throw ShapeError("operator matrix must be square");
    if (hermitian_ && max_abs(m_ - m_.adjoint()) >= kHermitianTol)
      throw ShapeError("operator flagged Hermitian but A - A^dagger is nonzero");
  }

  Index dim() const { return m_.rows(); }
  const MatrixType& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }

  BasicOperator adjoint() const { return BasicOperator(m_.adjoint(), hermitian_); }

  friend BasicOperator operator+(const BasicOperator& a, const BasicOperator& b) {
    check_same(a, b);
    return BasicOperator(a.m_ + b.m_, a.hermitian_ && b.hermitian_);
  }
  friend BasicOperator operator-(const BasicOperator& a, const BasicOperator& b) {
    check_same(a, b);
    return BasicOperator(a.m_ - b.m_, a.hermitian_ && b.hermitian_);
  }
  friend BasicOperator operator*(const BasicOperator& a, const BasicOperator& b) {
    check_same(a, b);
    return BasicOperator(a.m_ * b.m_, false);
  }
  friend BasicOperator operator*(double s, const BasicOperator& a) {
    return BasicOperator(Scalar(s) * a.m_, a.hermitian_);
  }

 private:
  static void check_same(const BasicOperator& a, const BasicOperator& b) {
    if (a.dim() != b.dim()) throw ShapeError("operator dimensions differ");
  }

  MatrixType m_;
  bool hermitian_ = false;
};

using Operator = BasicOperator<cplx>;

/// Normalizable ket.
class PureState {
 public:
  static constexpr double kNormTol = 1e-12;

  PureState() = default;
  explicit PureState(VectorXc amplitudes) : psi_(std::move(amplitudes)) {}

  static PureState normalized(VectorXc amplitudes);

  const VectorXc& amplitudes() const { return psi_; }
  VectorXc& amplitudes() { return psi_; }
  Index dim() const { return psi_.size(); }
  double norm() const { return psi_.norm(); }

  PureState& normalize();
  /// Rotates the global phase so the largest-magnitude amplitude is real positive.
  PureState& fix_phase();

  /// <this|other>
  cplx overlap(const PureState& other) const;

 private:
  VectorXc psi_;
};

PureState basis_state(const BasisTable& basis, const BasisLabel& label);

/// Re-expresses a state over another space that differs only in cutoff.
/// Throws ShapeError if amplitude above 1e-14 would be lost.
VectorXc change_cutoff(const BasisTable& from, const VectorXc& psi, const BasisTable& to);

/// Fidelity |<a|b>|^2 for normalized kets.
double fidelity(const VectorXc& a, const VectorXc& b);

// Elementary operators.  Dense versions return Operator; `sparse_` versions
// return real sparse matrices over the same basis.

Operator identity(const SpaceSpec& spec);
Operator annihilator(const SpaceSpec& spec, int mode);
Operator creator(const SpaceSpec& spec, int mode);
Operator number(const SpaceSpec& spec, int mode);
Operator pauli(const SpaceSpec& spec, int qubit, Axis axis);
/// sigma_- = |down><up| on one qubit.
Operator lowering(const SpaceSpec& spec, int qubit);
/// exp(i pi sum_i n_i) prod_j sigma_z^(j), diagonal.
Operator parity_operator(const SpaceSpec& spec);

SparseXd sparse_annihilator(const BasisTable& basis, int mode);
SparseXd sparse_number(const BasisTable& basis, int mode);
/// x and z only (the y matrix is imaginary).
SparseXd sparse_pauli(const BasisTable& basis, int qubit, Axis axis);
SparseXd sparse_lowering(const BasisTable& basis, int qubit);

/// Embeds a local matrix acting on one tensor factor.
/// Factors 0..n_qubits-1 are qubits, followed by the modes.
template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> embed(const BasisTable& basis, int factor,
                                                    const Matrix<Scalar>& local) {
  const auto& spec = basis.spec();
  if (factor < 0 || factor >= spec.n_factors()) throw ShapeError("factor index out of range");
  const Index d = basis.factor_size(factor);
  if (local.rows() != d || local.cols() != d) throw ShapeError("local matrix has wrong size");
  const Index stride = basis.stride(factor);
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<std::size_t>(basis.size()));
  for (Index col = 0; col < basis.size(); ++col) {
    const Index l = basis.digit(col, factor);
    for (Index r = 0; r < d; ++r) {
      const Scalar v = local(r, l);
      if (v != Scalar(0)) trips.emplace_back(col + (r - l) * stride, col, v);
    }
  }
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> out(basis.size(), basis.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// Restriction of a sparse matrix to a list of basis indices (rows and columns).
SparseXd restrict_to(const SparseXd& m, const std::vector<Index>& indices);

/// Basis indices whose total photon number is at most `max_total`.
std::vector<Index> states_with_total_photons_at_most(const BasisTable& basis, int max_total);
/// Basis indices with fewer than `cutoff` photons in every mode.
std::vector<Index> states_below_cutoff(const BasisTable& basis);

/// Max-norm of the columns `columns` of [A, B].
double commutator_norm_on(const MatrixXc& a, const MatrixXc& b, const std::vector<Index>& columns);

}  // namespace rabi
