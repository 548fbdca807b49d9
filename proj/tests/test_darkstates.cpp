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

#include "rabi/darkstates.hpp"
#include "rabi/spectra.hpp"

using namespace rabi;

namespace {

ModelParams two_qubit(const SpaceSpec& spec, double d1, double d2, double g, double u1 = 0.0, double u2 = 0.0) {
  auto p = ModelParams::zeros(spec);
  p.delta << d1, d2;
  p.g.setConstant(g);
  p.u.col(0).setConstant(u1);
  p.u.col(1).setConstant(u2);
  return p;
}

double amp(const Certificate& c, const BasisTable& basis, const BasisLabel& l) {
  return c.state.amplitudes()(basis.index(l)).real();
}

double overlap_modulus(const Certificate& a, const Certificate& b) {
  return std::abs(a.state.overlap(b.state));
}

// Every certificate is checked against an independent dense Hamiltonian.
void check_eigen(const SpaceSpec& spec, const ModelParams& p, const Certificate& c, double tol = 1e-10) {
  const MatrixXc h = hamiltonian_rabi_stark(spec, p).matrix();
  const VectorXc& psi = c.state.amplitudes();
  CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
  CHECK((h * psi - c.energy * psi).norm() < tol);
  CHECK(c.residual < tol);
  const VectorXc ppsi = parity_operator(spec).matrix() * psi;
  CHECK(c.parity != 0);
  CHECK((ppsi - double(c.parity) * psi).norm() < 1e-10);
}

const Spin U = Spin::up;
const Spin D = Spin::down;

}  // namespace

TEST_CASE("psi_d amplitudes") {
  const SpaceSpec spec{2, 1, 2};
  const auto basis = build_space(spec);
  auto p = two_qubit(spec, 0.8, 0.2, 0.5);
  auto c = psi_d(spec, p);
  check_eigen(spec, p, c);
  const double n = std::sqrt(0.36 + 0.25 + 0.25);
  CHECK(amp(c, basis, {{U, U}, {0}}) == doctest::Approx(0.6 / n));
  CHECK(amp(c, basis, {{D, U}, {1}}) == doctest::Approx(0.5 / n));
  CHECK(amp(c, basis, {{U, D}, {1}}) == doctest::Approx(-0.5 / n));
  CHECK(c.energy == 1.0);
  CHECK(c.photon_bound == std::pair{0, 1});

  p = two_qubit(spec, 0.5, 0.5, 0.3);
  c = psi_d(spec, p);
  check_eigen(spec, p, c);
  CHECK(std::abs(amp(c, basis, {{U, U}, {0}})) < 1e-15);
  CHECK(std::abs(amp(c, basis, {{D, U}, {1}})) == doctest::Approx(1.0 / std::sqrt(2.0)));

  p = two_qubit(spec, 0.8, 0.2, 0.0);
  c = psi_d(spec, p);
  CHECK(amp(c, basis, {{U, U}, {0}}) == doctest::Approx(1.0));
  CHECK(c.residual < 1e-15);

  p = two_qubit(spec, 0.9, 0.2, 0.3);
  CHECK_THROWS_AS(psi_d(spec, p), ConditionError);
  p = two_qubit(spec, 0.8, 0.2, 0.3);
  p.g(0, 1) = 0.2;
  CHECK_THROWS_AS(psi_d(spec, p), ConditionError);
  p = two_qubit(spec, 0.8, 0.2, 0.3, 0.1, 0.1);
  CHECK_THROWS_AS(psi_d(spec, p), ConditionError);
}

TEST_CASE("psi_2plus") {
  SpaceSpec spec{2, 2, 2};
  auto basis = build_space(spec);
  auto p = two_qubit(spec, 0.8, 0.2, 0.3);
  auto c = psi_2plus(spec, p);
  check_eigen(spec, p, c);
  CHECK(amp(c, basis, {{D, U}, {1, 0}}) == doctest::Approx(amp(c, basis, {{D, U}, {0, 1}})));

  SpaceSpec one{2, 1, 3};
  auto p1 = two_qubit(one, 0.7, 0.3, 0.4);
  CHECK(overlap_modulus(psi_2plus(one, p1), psi_d(one, p1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_abs(VectorXc(psi_2plus(one, p1).state.amplitudes() - psi_d(one, p1).state.amplitudes())) < 1e-15);

  spec = {2, 3, 2};
  p = ModelParams::zeros(spec);
  p.delta << 0.75, 0.25;
  p.g.col(0) << 0.1, 0.2, 0.3;
  p.g.col(1) = p.g.col(0);
  c = psi_2plus(spec, p);
  check_eigen(spec, p, c);
  CHECK(c.photon_bound == std::pair{0, 1});
}

TEST_CASE("psi_ds and psi_2splus") {
  const SpaceSpec one{2, 1, 2};
  const auto b1 = build_space(one);
  auto p = two_qubit(one, 0.8, 0.2, 0.3, 0.5, 0.5);
  auto c = psi_ds(one, p);
  check_eigen(one, p, c);
  // amplitudes (D1 - D2 + U1 - U2, g, -g)
  const double n = std::sqrt(0.36 + 0.09 + 0.09);
  CHECK(amp(c, b1, {{U, U}, {0}}) == doctest::Approx(0.6 / n));
  CHECK(amp(c, b1, {{D, U}, {1}}) == doctest::Approx(0.3 / n));

  auto q = two_qubit(one, 0.6, 0.4, 0.3, 0.5, 0.2);
  c = psi_ds(one, q);
  check_eigen(one, q, c);
  CHECK(amp(c, b1, {{U, U}, {0}}) / amp(c, b1, {{D, U}, {1}}) == doctest::Approx(0.5 / 0.3));

  // equal Stark shifts reduce to psi_d
  auto r = two_qubit(one, 0.8, 0.2, 0.3);
  CHECK(overlap_modulus(psi_ds(one, p), psi_d(one, r)) == doctest::Approx(1.0).epsilon(1e-14));
  // M = 1 psi_2splus equals psi_ds
  CHECK(overlap_modulus(psi_2splus(one, p), psi_ds(one, p)) == doctest::Approx(1.0).epsilon(1e-14));

  const SpaceSpec two{2, 2, 2};
  const auto b2 = build_space(two);
  auto s = two_qubit(two, 0.5, 0.5, 0.35, 2.0 / 3.0, 1.0 / 3.0);
  c = psi_2splus(two, s);
  check_eigen(two, s, c);
  CHECK(c.energy == 1.0);
  CHECK(amp(c, b2, {{D, U}, {1, 0}}) == doctest::Approx(amp(c, b2, {{D, U}, {0, 1}})));

  auto plain = two_qubit(two, 0.7, 0.3, 0.35);
  auto equal_u = two_qubit(two, 0.7, 0.3, 0.35, 0.4, 0.4);
  CHECK(overlap_modulus(psi_2splus(two, equal_u), psi_2plus(two, plain)) == doctest::Approx(1.0).epsilon(1e-14));

  // mode-dependent denominators
  auto mixed = two_qubit(two, 0.7, 0.3, 0.2);
  mixed.u.row(0) << 0.5, 0.1;
  mixed.u.row(1) << 0.1, 0.2;
  c = psi_2splus(two, mixed);
  check_eigen(two, mixed, c);

  auto singular = two_qubit(two, 0.7, 0.3, 0.2);
  singular.u.row(0) << 0.0, 0.4;
  singular.u.row(1) << 0.1, 0.2;
  CHECK_THROWS_AS(psi_2splus(two, singular), SingularError);
}

TEST_CASE("odd parity families") {
  const SpaceSpec spec{2, 2, 2};
  auto p = two_qubit(spec, 0.8, -0.2, 0.3, 0.2, 0.1);
  auto c = psi_odd_parity(spec, p, OddVariant::a);
  check_eigen(spec, p, c);
  CHECK(c.parity == -1);
  CHECK(c.energy == doctest::Approx(1.0));
  CHECK(c.photon_bound == std::pair{0, 1});

  auto q = two_qubit(spec, -0.2, 0.8, 0.3, 0.1, 0.3);
  c = psi_odd_parity(spec, q, OddVariant::b);
  check_eigen(spec, q, c);
  CHECK(c.parity == -1);
  CHECK_THROWS_AS(psi_odd_parity(spec, p, OddVariant::b), ConditionError);

  // agrees with the nullspace finder in the plain limit
  auto plain = two_qubit(spec, 0.8, -0.2, 0.3);
  c = psi_odd_parity(spec, plain, OddVariant::a);
  const auto kernel = one_photon_nullspace(spec, plain, -1, 1.0);
  REQUIRE(kernel.size() == 1);
  CHECK(overlap_modulus(kernel[0], c) > 1.0 - 1e-10);
}

TEST_CASE("three-qubit family") {
  const SpaceSpec spec{3, 1, 2};
  const auto basis = build_space(spec);
  auto p = ModelParams::zeros(spec);
  p.delta.setConstant(1.0);
  p.g << 0.4, 0.2, 0.2;
  auto c = psi_3s_minus(spec, p);
  check_eigen(spec, p, c);
  CHECK(c.parity == -1);
  CHECK(c.energy == 1.0);
  CHECK(c.photon_bound == std::pair{0, 1});
  // one-photon qubit pattern up-dn-dn - dn-up-dn - dn-dn-up + up-up-up
  const double ref = amp(c, basis, {{U, D, D}, {1}});
  CHECK(std::abs(ref) > 1e-3);
  CHECK(amp(c, basis, {{D, U, D}, {1}}) == doctest::Approx(-ref));
  CHECK(amp(c, basis, {{D, D, U}, {1}}) == doctest::Approx(-ref));
  CHECK(amp(c, basis, {{U, U, U}, {1}}) == doctest::Approx(ref));

  p.g << 0.5, 0.2, 0.2;
  CHECK_THROWS_AS(psi_3s_minus(spec, p), ConditionError);
}

TEST_CASE("composite with appended singlets") {
  const SpaceSpec two{2, 2, 2};
  auto p2 = two_qubit(two, 0.5, 0.5, 0.3, 2.0 / 3.0, 1.0 / 3.0);
  const auto base = psi_2splus(two, p2);

  const SpaceSpec four{4, 2, 2};
  auto p4 = ModelParams::zeros(four);
  p4.delta << 0.5, 0.5, 0.3, 0.3;
  p4.g.leftCols(2) = p2.g;
  p4.g.col(2).setConstant(0.2);
  p4.g.col(3).setConstant(0.2);
  p4.u.leftCols(2) = p2.u;
  p4.u.col(2).setConstant(0.1);
  p4.u.col(3).setConstant(0.1);
  const auto c = psi_N_composite(four, p4, 1);
  check_eigen(four, p4, c);
  CHECK(c.energy == doctest::Approx(base.energy));
  CHECK(c.parity == -base.parity);

  p4.delta(3) = 0.4;
  CHECK_THROWS_AS(psi_N_composite(four, p4, 1), ConditionError);
}

TEST_CASE("lifted free-mode states") {
  const SpaceSpec two{2, 2, 3};
  const auto basis = build_space(two);
  auto p = two_qubit(two, 0.8, 0.2, 0.25);
  const SpaceSpec one{2, 1, 2};
  const auto single = psi_ds(one, single_mode_reduction(p));
  const auto c = phi_K_state(two, p, one, single.state.amplitudes(), single.energy, {1});
  check_eigen(two, p, c);
  CHECK(c.energy - single.energy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.photon_bound.first >= 1);
  // vacuum part of psi_ds becomes (|10> - |01>)/sqrt2 up to a sign
  const double a10 = amp(c, basis, {{U, U}, {1, 0}});
  CHECK(std::abs(a10) > 1e-3);
  CHECK(amp(c, basis, {{U, U}, {0, 1}}) == doctest::Approx(-a10));

  // orthogonal to every state with fewer than K photons, and <K-1|H|phi_K> = 0
  const MatrixXc h = hamiltonian_mqrm(two, p).matrix();
  const VectorXc hpsi = h * c.state.amplitudes();
  for (Index i = 0; i < basis.size(); ++i)
    if (basis.total_photons(i) < 1) {
      CHECK(std::abs(c.state.amplitudes()(i)) < 1e-14);
      CHECK(std::abs(hpsi(i)) < 1e-10);
    }

  const SpaceSpec tight{2, 2, 1};
  auto pt = two_qubit(tight, 0.8, 0.2, 0.25);
  CHECK_THROWS_AS(phi_K_state(tight, pt, one, single.state.amplitudes(), single.energy, {1}), CapacityError);
  CHECK_THROWS_AS(phi_K_state(two, p, one, single.state.amplitudes(), single.energy, {0}), ConditionError);
}

TEST_CASE("squeezed dark state") {
  const SpaceSpec spec{2, 1, 20};
  auto p = two_qubit(spec, 0.8, 0.2, 0.5, 0.5, 0.5);
  const auto limit = squeezed_dark_state(spec, p);
  CHECK(limit.energy == -1.0);
  CHECK(limit.residual < 1e-10);
  check_eigen(spec, p, limit);
  const auto c20 = squeezed_dark_state(spec, p, 1.0);
  const SpaceSpec spec40{2, 1, 40};
  const auto c40 = squeezed_dark_state(spec40, two_qubit(spec40, 0.8, 0.2, 0.5, 0.5, 0.5), 1.0);
  CHECK(c40.untruncated_residual < c20.untruncated_residual);

  // the qubit part is the product state dn dn
  const auto basis = build_space(spec);
  double down_weight = 0.0;
  for (Index i = 0; i < basis.size(); ++i)
    if (basis.spin(i, 0) == Spin::down && basis.spin(i, 1) == Spin::down) down_weight += std::norm(c20.state.amplitudes()(i));
  CHECK(down_weight == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(squeezed_dark_state({2, 1, 21}, two_qubit({2, 1, 21}, 0.8, 0.2, 0.5, 0.5, 0.5)), ConditionError);
  CHECK_THROWS_AS(squeezed_dark_state(spec, two_qubit(spec, 0.8, 0.2, 0.5, 0.5, 0.4)), ConditionError);
}

TEST_CASE("nullspace finder") {
  const SpaceSpec one{2, 1, 3};
  auto p = two_qubit(one, 0.7, 0.3, 0.4, 0.45, 0.3);
  auto kernel = one_photon_nullspace(one, p, 1);
  REQUIRE(kernel.size() == 1);
  CHECK(kernel[0].energy == doctest::Approx(1.0));
  CHECK(overlap_modulus(kernel[0], psi_ds(one, p)) > 1.0 - 1e-10);

  auto generic = two_qubit(one, 0.65, 0.2, 0.4, 0.1, 0.3);
  generic.g(0, 1) = 0.3;
  CHECK(one_photon_nullspace(one, generic, 1).empty());
  CHECK(one_photon_nullspace(one, generic, -1).empty());

  const SpaceSpec two{2, 2, 2};
  auto s = two_qubit(two, 0.5, 0.5, 0.35, 2.0 / 3.0, 1.0 / 3.0);
  kernel = one_photon_nullspace(two, s, 1);
  REQUIRE(kernel.size() == 1);
  CHECK(overlap_modulus(kernel[0], psi_2splus(two, s)) > 1.0 - 1e-10);
}

TEST_CASE("certificates are cutoff exact") {
  auto spec_lo = SpaceSpec{2, 2, 2};
  auto spec_hi = SpaceSpec{2, 2, 7};
  auto lo = psi_2splus(spec_lo, two_qubit(spec_lo, 0.6, 0.4, 0.3, 0.5, 0.2));
  auto hi = psi_2splus(spec_hi, two_qubit(spec_hi, 0.6, 0.4, 0.3, 0.5, 0.2));
  CHECK(std::abs(lo.energy - hi.energy) < 1e-12);
  CHECK(hi.residual < 1e-10);
  CHECK(max_abs(VectorXc(change_cutoff(build_space(spec_hi), hi.state.amplitudes(), build_space(spec_lo)) -
                         lo.state.amplitudes())) < 1e-14);
}

TEST_CASE("records and names") {
  for (auto f : {DarkStateFamily::psi_d, DarkStateFamily::psi_2splus, DarkStateFamily::squeezed_down,
                 DarkStateFamily::phi_K_lifted})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS(parse_family("psi_unknown"));
  const SpaceSpec spec{2, 1, 2};
  const auto c = psi_d(spec, two_qubit(spec, 0.8, 0.2, 0.5));
  const std::string rec = to_record(c, spec);
  CHECK(rec.find("family=psi_d") != std::string::npos);
  CHECK(rec.find("energy=1") != std::string::npos);
  CHECK(format_label({{D, U}, {1}}) == "|1; dn up>");
}
