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


#include <doctest.h>

#include <random>

#include "rabi/hilbert.hpp"
#include "rabi/models.hpp"

using namespace rabi;

namespace {

MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Reference embedding built factor by factor with explicit Kronecker products.
MatrixXc embed_ref(const SpaceSpec& spec, int factor, const MatrixXc& local) {
  MatrixXc out = MatrixXc::Identity(1, 1);
  for (int f = 0; f < spec.n_factors(); ++f) {
    const Index d = f < spec.n_qubits ? 2 : spec.levels();
    out = kron(out, f == factor ? local : MatrixXc::Identity(d, d));
  }
  return out;
}

MatrixXc ladder(int cutoff) {
  MatrixXc a = MatrixXc::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

}  // namespace

TEST_CASE("dimensions") {
  CHECK(build_space({2, 1, 1}).size() == 8);
  CHECK(build_space({2, 2, 3}).size() == 64);
  CHECK(build_space({3, 3, 5}).size() == 1728);
  CHECK_THROWS_AS(build_space({2, 10, 9}), CapacityError);
  CHECK_THROWS_AS(build_space({2, 2, 3}, 63), CapacityError);
  CHECK_THROWS_AS(build_space({2, 1, 0}), ShapeError);
}

TEST_CASE("basis table is a bijection") {
  const auto basis = build_space({2, 2, 3});
  for (Index i = 0; i < basis.size(); ++i) CHECK(basis.index(basis.label(i)) == i);
  // first state: all up, vacuum; qubit 0 is the slowest digit
  CHECK(basis.label(0) == BasisLabel{{Spin::up, Spin::up}, {0, 0}});
  CHECK(basis.label(1) == BasisLabel{{Spin::up, Spin::up}, {0, 1}});
  CHECK(basis.label(basis.size() - 1) == BasisLabel{{Spin::down, Spin::down}, {3, 3}});
}

TEST_CASE("ladder operators") {
  const SpaceSpec spec{1, 1, 2};
  const auto basis = build_space(spec);
  const auto a = annihilator(spec, 0).matrix();
  const VectorXc two = basis_state(basis, {{Spin::up}, {2}}).amplitudes();
  const VectorXc one = basis_state(basis, {{Spin::up}, {1}}).amplitudes();
  const VectorXc vac = basis_state(basis, {{Spin::up}, {0}}).amplitudes();
  CHECK(max_abs(VectorXc(a * two - std::sqrt(2.0) * one)) < 1e-15);
  CHECK(max_abs(VectorXc(a * vac)) == 0.0);
  CHECK_THROWS_AS(annihilator(spec, 1), ShapeError);
  CHECK_THROWS_AS(annihilator(spec, -1), ShapeError);
}

TEST_CASE("operators match Kronecker embeddings") {
  const SpaceSpec spec{2, 2, 3};
  const auto basis = build_space(spec);
  MatrixXc sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  for (int m = 0; m < 2; ++m) {
    CHECK(max_abs(MatrixXc(annihilator(spec, m).matrix() - embed_ref(spec, 2 + m, ladder(3)))) < 1e-15);
    CHECK(max_abs(MatrixXc(MatrixXc(sparse_annihilator(basis, m)) - embed_ref(spec, 2 + m, ladder(3)))) < 1e-15);
  }
  for (int q = 0; q < 2; ++q) {
    CHECK(max_abs(MatrixXc(pauli(spec, q, Axis::x).matrix() - embed_ref(spec, q, sx))) == 0.0);
    CHECK(max_abs(MatrixXc(pauli(spec, q, Axis::z).matrix() - embed_ref(spec, q, sz))) == 0.0);
  }
}

TEST_CASE("canonical commutator below the cutoff") {
  const SpaceSpec spec{1, 3, 3};
  const auto basis = build_space(spec);
  const auto below = states_below_cutoff(basis);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const MatrixXc a = annihilator(spec, i).matrix();
      const MatrixXc ad = creator(spec, j).matrix();
      const MatrixXc c = a * ad - ad * a;
      const MatrixXc expected = double(i == j) * MatrixXc::Identity(spec.dim(), spec.dim());
      double err = 0.0;
      for (Index col : below) err = std::max(err, max_abs(VectorXc(c.col(col) - expected.col(col))));
      CHECK(err < 1e-12);
    }
}

TEST_CASE("pauli algebra") {
  const SpaceSpec spec{2, 1, 1};
  const auto basis = build_space(spec);
  const VectorXc up = basis_state(basis, {{Spin::up, Spin::up}, {0}}).amplitudes();
  const VectorXc dn = basis_state(basis, {{Spin::down, Spin::up}, {0}}).amplitudes();
  const MatrixXc sx = pauli(spec, 0, Axis::x).matrix();
  const MatrixXc sy = pauli(spec, 0, Axis::y).matrix();
  const MatrixXc sz = pauli(spec, 0, Axis::z).matrix();
  CHECK(max_abs(VectorXc(sz * up - up)) == 0.0);
  CHECK(max_abs(VectorXc(sx * up - dn)) == 0.0);
  CHECK(max_abs(MatrixXc(sx * sz + sz * sx)) == 0.0);
  const MatrixXc id = MatrixXc::Identity(8, 8);
  for (const MatrixXc* s : {&sx, &sy, &sz}) CHECK(max_abs(MatrixXc(*s * *s - id)) < 1e-15);
  CHECK(max_abs(MatrixXc(sx * sy - cplx(0, 1) * sz)) < 1e-15);
  const MatrixXc lower = lowering(spec, 0).matrix();
  CHECK(max_abs(VectorXc(lower * up - dn)) == 0.0);
  CHECK_THROWS_AS(pauli(spec, 2, Axis::x), ShapeError);
}

TEST_CASE("disjoint factors commute") {
  const SpaceSpec spec{2, 2, 2};
  std::vector<MatrixXc> ops;
  ops.push_back(pauli(spec, 0, Axis::x).matrix());
  ops.push_back(pauli(spec, 1, Axis::y).matrix());
  ops.push_back(annihilator(spec, 0).matrix());
  ops.push_back(creator(spec, 1).matrix());
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) CHECK(max_abs(commutator(ops[i], ops[j])) == 0.0);
}

TEST_CASE("parity operator") {
  const SpaceSpec spec{2, 2, 2};
  const auto basis = build_space(spec);
  const MatrixXc p = parity_operator(spec).matrix();
  CHECK(max_abs(MatrixXc(p * p - MatrixXc::Identity(spec.dim(), spec.dim()))) == 0.0);
  CHECK(max_abs(MatrixXc(p.diagonal().asDiagonal())) == 1.0);
  CHECK(max_abs(MatrixXc(p - MatrixXc(p.diagonal().asDiagonal()))) == 0.0);
  const VectorXc s0 = basis_state(basis, {{Spin::up, Spin::up}, {0, 0}}).amplitudes();
  const VectorXc s1 = basis_state(basis, {{Spin::down, Spin::up}, {1, 0}}).amplitudes();
  const VectorXc s2 = basis_state(basis, {{Spin::down, Spin::up}, {0, 0}}).amplitudes();
  CHECK(max_abs(VectorXc(p * s0 - s0)) == 0.0);
  CHECK(max_abs(VectorXc(p * s1 - s1)) == 0.0);
  CHECK(max_abs(VectorXc(p * s2 + s2)) == 0.0);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto params = ModelParams::zeros(spec);
    params.delta = VectorXd::NullaryExpr(2, [&] { return dist(rng); });
    params.omega = VectorXd::NullaryExpr(2, [&] { return 1.0 + 0.5 * dist(rng); });
    params.g = MatrixXd::NullaryExpr(2, 2, [&] { return dist(rng); });
    params.u = MatrixXd::NullaryExpr(2, 2, [&] { return dist(rng); });
    const MatrixXc h = hamiltonian_rabi_stark(spec, params).matrix();
    CHECK(max_abs(commutator(h, p)) < 1e-12);
  }
}

TEST_CASE("states and cutoff changes") {
  const auto small = build_space({2, 2, 2});
  const auto large = build_space({2, 2, 4});
  VectorXc psi = VectorXc::Zero(small.size());
  psi(small.index({{Spin::down, Spin::up}, {1, 0}})) = 0.6;
  psi(small.index({{Spin::up, Spin::up}, {0, 2}})) = cplx(0, 0.8);
  const VectorXc up = change_cutoff(small, psi, large);
  CHECK(up(large.index({{Spin::up, Spin::up}, {0, 2}})) == cplx(0, 0.8));
  CHECK(max_abs(VectorXc(change_cutoff(large, up, small) - psi)) == 0.0);
  const auto tiny = build_space({2, 2, 1});
  CHECK_THROWS_AS(change_cutoff(small, psi, tiny), ShapeError);
  CHECK(fidelity(psi, psi) == doctest::Approx(1.0));

  auto s = PureState::normalized(VectorXc::Constant(4, cplx(0, -2)));
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  s.fix_phase();
  CHECK(std::abs(s.amplitudes()(0).imag()) < 1e-15);
  CHECK(s.amplitudes()(0).real() > 0.0);
}

TEST_CASE("operator flags") {
  MatrixXc m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(Operator(m, true), ShapeError);
  CHECK_NOTHROW(Operator(m, false));
  const Operator x = pauli({1, 1, 1}, 0, Axis::x);
  CHECK(x.hermitian());
  CHECK((x * x).hermitian() == false);
  CHECK((x + x).hermitian());
  CHECK_THROWS_AS(x + identity({2, 1, 1}), ShapeError);
}
