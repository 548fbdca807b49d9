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

#include <algorithm>
#include <random>

#include "rabi/models.hpp"
#include "rabi/spectra.hpp"

using namespace rabi;

namespace {

VectorXd spectrum(const SpaceSpec& spec, const ModelParams& p) {
  return eigensystem(spec, hamiltonian_rabi_stark(spec, p)).energies;
}

ModelParams two_qubit(const SpaceSpec& spec, double d1, double d2, double g, double u = 0.0) {
  auto p = ModelParams::zeros(spec);
  p.delta << d1, d2;
  p.g.setConstant(g);
  p.u.setConstant(u);
  return p;
}

}  // namespace

TEST_CASE("decoupled single-qubit spectrum") {
  const SpaceSpec spec{1, 1, 6};
  auto p = ModelParams::zeros(spec);
  p.delta << 0.3;
  std::vector<double> expected;
  for (int n = 0; n <= 6; ++n)
    for (double s : {-1.0, 1.0}) expected.push_back(s * 0.3 + n);
  std::sort(expected.begin(), expected.end());
  const VectorXd e = eigensystem(spec, hamiltonian_mqrm(spec, p)).energies;
  for (Index k = 0; k < e.size(); ++k) CHECK(e(k) == doctest::Approx(expected[std::size_t(k)]).epsilon(1e-14));
}

TEST_CASE("displaced oscillator ground energy") {
  const SpaceSpec spec{1, 1, 40};
  for (double g : {0.2, 0.5, 0.8}) {
    auto p = ModelParams::zeros(spec);
    p.g << g;
    const double e0 = eigensystem(spec, hamiltonian_mqrm(spec, p)).energies(0);
    CHECK(std::abs(e0 + g * g) < 1e-6);
  }
}

TEST_CASE("hermiticity and reduction to the plain model") {
  const SpaceSpec spec{2, 2, 3};
  auto p = two_qubit(spec, 0.8, 0.2, 0.3);
  p.omega << 1.0, 1.3;
  const Operator h0 = hamiltonian_mqrm(spec, p);
  CHECK(h0.hermitian());
  CHECK(max_abs(MatrixXc(h0.matrix() - hamiltonian_rabi_stark(spec, p).matrix())) == 0.0);
  p.u(0, 1) = 0.4;
  CHECK_THROWS_AS(hamiltonian_mqrm(spec, p), ConditionError);
  const MatrixXc h = hamiltonian_rabi_stark(spec, p).matrix();
  CHECK(max_abs(MatrixXc(h - h.adjoint())) < 1e-12);
  p.omega(1) = -1.0;
  CHECK_THROWS(hamiltonian_rabi_stark(spec, p));
  auto bad = p;
  bad.g = MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(hamiltonian_rabi_stark(spec, bad), ShapeError);
}

TEST_CASE("two-mode plain model keeps E = omega") {
  const SpaceSpec spec{2, 2, 8};
  for (double g : {0.1, 0.3, 0.5}) {
    const auto p = two_qubit(spec, 0.8, 0.2, g);
    const VectorXd e = eigensystem(spec, hamiltonian_mqrm(spec, p), Sector::even).energies;
    CHECK((e.array() - 1.0).abs().minCoeff() < 1e-10);
  }
}

TEST_CASE("Stark model keeps E = omega and E = -D1 - D2") {
  const SpaceSpec spec{2, 2, 8};
  for (double g : {0.2, 0.4, 0.7}) {
    const auto p = two_qubit(spec, 0.8, 0.2, g, 0.5);
    const VectorXd e = eigensystem(spec, hamiltonian_rabi_stark(spec, p), Sector::even).energies;
    CHECK((e.array() - 1.0).abs().minCoeff() < 1e-10);
    CHECK((e.array() + 1.0).abs().minCoeff() < 1e-10);
  }
}

TEST_CASE("single qubit with U = omega: the down sector has no photon energy") {
  const SpaceSpec spec{1, 1, 5};
  const auto basis = build_space(spec);
  auto p = ModelParams::zeros(spec);
  p.delta << 0.4;
  p.u << 1.0;
  const MatrixXc h = hamiltonian_rabi_stark(spec, p).matrix();
  for (int n = 0; n <= 5; ++n) {
    const Index i = basis.index({{Spin::down}, {n}});
    CHECK(h(i, i).real() == doctest::Approx(-0.4));
    const Index j = basis.index({{Spin::up}, {n}});
    CHECK(h(j, j).real() == doctest::Approx(0.4 + 2.0 * n));
  }
}

TEST_CASE("Bogoliubov frame") {
  VectorXd g(2);
  g << 0.3, 0.3;
  auto f = bogoliubov_frame(g);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(f.coeffs(0, 0) == doctest::Approx(r));
  CHECK(f.coeffs(0, 1) == doctest::Approx(r));
  CHECK(f.coeffs(1, 0) == doctest::Approx(r));
  CHECK(f.coeffs(1, 1) == doctest::Approx(-r));
  CHECK(f.g_norm == doctest::Approx(0.3 * std::sqrt(2.0)));

  f = bogoliubov_frame(Eigen::Vector3d(1, 0, 0));
  CHECK(max_abs(MatrixXd(f.coeffs.cwiseAbs() - MatrixXd::Identity(3, 3))) < 1e-15);

  f = bogoliubov_frame(Eigen::Vector3d(1, 2, 3) / std::sqrt(14.0));
  CHECK(max_abs(MatrixXd(f.coeffs * f.coeffs.transpose() - MatrixXd::Identity(3, 3))) < 1e-14);

  // vanishing leading couplings use the Gram-Schmidt completion
  f = bogoliubov_frame(Eigen::Vector4d(0, 0, 2, 1));
  CHECK(max_abs(MatrixXd(f.coeffs * f.coeffs.transpose() - MatrixXd::Identity(4, 4))) < 1e-14);
  CHECK(f.coeffs.row(0).transpose().isApprox(Eigen::Vector4d(0, 0, 2, 1).normalized()));

  CHECK_THROWS_AS(bogoliubov_frame(Eigen::Vector2d::Zero()), ConditionError);
}

TEST_CASE("free Bogoliubov modes are conserved for equal frequencies") {
  const SpaceSpec spec{2, 3, 4};
  const auto basis = build_space(spec);
  auto p = ModelParams::zeros(spec);
  p.delta << 0.7, 0.3;
  const Eigen::Vector3d dir(1, 2, 3);
  p.g.col(0) = 0.1 * dir;
  p.g.col(1) = 0.1 * dir;
  p.u.setConstant(0.5);
  const auto frame = bogoliubov_frame(dir);
  const MatrixXc h = hamiltonian_rabi_stark(spec, p).matrix();
  // the truncation breaks the symmetry only at the cutoff
  const auto cols = states_with_total_photons_at_most(basis, spec.cutoff - 1);
  for (int j = 1; j < 3; ++j) {
    const MatrixXc nb = b_number_operator(spec, frame, j).matrix();
    CHECK(commutator_norm_on(h, nb, cols) < 1e-10);
  }
  CHECK_THROWS_AS(b_number_operator(spec, frame, 0), ShapeError);
  CHECK_THROWS_AS(b_number_operator(spec, frame, 3), ShapeError);

  p.omega(1) = 1.2;
  const MatrixXc h2 = hamiltonian_rabi_stark(spec, p).matrix();
  CHECK(commutator_norm_on(h2, b_number_operator(spec, frame, 1).matrix(), cols) > 1e-3);
}

TEST_CASE("unequal frequencies break the free-mode symmetry") {
  const SpaceSpec spec{2, 2, 4};
  const auto basis = build_space(spec);
  auto p = two_qubit(spec, 0.8, 0.2, 0.3);
  p.omega << 1.0, 1.2;
  const auto frame = bogoliubov_frame(Eigen::Vector2d(1, 1));
  const auto cols = states_with_total_photons_at_most(basis, spec.cutoff - 1);
  const MatrixXc nb = b_number_operator(spec, frame, 1).matrix();
  CHECK(commutator_norm_on(hamiltonian_mqrm(spec, p).matrix(), nb, cols) > 1e-3);
  p.omega << 1.0, 1.0;
  CHECK(commutator_norm_on(hamiltonian_mqrm(spec, p).matrix(), nb, cols) < 1e-10);
}

TEST_CASE("b_2 creation gives a number eigenstate") {
  const SpaceSpec spec{1, 2, 2};
  const auto basis = build_space(spec);
  const auto frame = bogoliubov_frame(Eigen::Vector2d(0.4, 0.7));
  const VectorXc vac = basis_state(basis, {{Spin::down}, {0, 0}}).amplitudes();
  const VectorXc one = b_operator(spec, frame, 1).matrix().adjoint() * vac;
  const MatrixXc nb = b_number_operator(spec, frame, 1).matrix();
  CHECK(max_abs(VectorXc(nb * one - one)) < 1e-14);
  CHECK(one.norm() == doctest::Approx(1.0));
}

TEST_CASE("permuting modes leaves the spectrum unchanged") {
  const SpaceSpec spec{2, 3, 3};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  auto p = ModelParams::zeros(spec);
  p.delta << 0.6, 0.25;
  p.omega << 1.0, 0.9, 1.2;
  p.g = MatrixXd::NullaryExpr(3, 2, [&] { return dist(rng); });
  p.u = MatrixXd::NullaryExpr(3, 2, [&] { return dist(rng); });
  Eigen::PermutationMatrix<3> perm;
  perm.indices() << 2, 0, 1;
  auto q = p;
  q.omega = perm * p.omega;
  q.g = perm * p.g;
  q.u = perm * p.u;
  CHECK(max_abs(VectorXd(spectrum(spec, p) - spectrum(spec, q))) < 1e-10);
}

TEST_CASE("single-mode reduction") {
  const SpaceSpec spec{2, 2, 2};
  auto p = two_qubit(spec, 0.8, 0.2, 0.0, 0.5);
  p.g.col(0) << 0.3, 0.4;
  p.g.col(1) << 0.6, 0.8;
  const auto r = single_mode_reduction(p);
  CHECK(r.g(0, 0) == doctest::Approx(0.5));
  CHECK(r.g(0, 1) == doctest::Approx(1.0));
  CHECK(r.u(0, 0) == 0.5);
  p.u(1, 0) = 0.1;
  CHECK_THROWS_AS(single_mode_reduction(p), ConditionError);
}

TEST_CASE("spectrum equivalence between one and two modes") {
  const SpaceSpec spec2{2, 2, 12};
  const SpaceSpec spec1{2, 1, 24};
  const double g = 0.3;
  auto p2 = two_qubit(spec2, 0.5, 0.5, g / std::sqrt(2.0));
  auto p1 = two_qubit(spec1, 0.5, 0.5, g);
  const auto rep = spectrum_equivalence_report(spec2, p2, spec1, p1);
  CHECK(rep.matched.size() > 4);
  CHECK(rep.max_matched_discrepancy < 1e-8);
  CHECK(!rep.extra.empty());
  CHECK(rep.max_offset_error < 1e-8);
  CHECK(rep.max_label_defect < 1e-8);
  CHECK(rep.unmatched_single == 0);
  CHECK(std::any_of(rep.extra.begin(), rep.extra.end(), [](const ExtraLevel& x) { return x.k == 1; }));

  const auto self = spectrum_equivalence_report(spec1, p1, spec1, p1);
  CHECK(self.extra.empty());
  CHECK(self.max_matched_discrepancy == 0.0);

  auto wrong = p1;
  wrong.g.setConstant(0.35);
  CHECK_THROWS_AS(spectrum_equivalence_report(spec2, p2, spec1, wrong), ConditionError);
  p2.omega << 1.0, 1.1;
  CHECK_THROWS_AS(spectrum_equivalence_report(spec2, p2, spec1, p1), ConditionError);
}
