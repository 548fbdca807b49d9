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

#include "rabi/schedule.hpp"
#include "rabi/spectra.hpp"

using namespace rabi;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[std::size_t(k)] = a + (b - a) * k / (n - 1);
  return x;
}

// Two qubits, uniform coupling g on every mode.
ParamsAt uniform_coupling(const SpaceSpec& spec, double d1, double d2, double u) {
  return [=](double g) {
    auto p = ModelParams::zeros(spec);
    p.delta << d1, d2;
    p.g.setConstant(g);
    p.u.setConstant(u);
    return p;
  };
}

void check_eigensystem(const MatrixXc& h, const EigenSystem& es) {
  CHECK(eigen_residual(h, es) < 1e-9);
  CHECK(gram_residual(es) < 1e-10);
  for (Index k = 1; k < es.size(); ++k) CHECK(es.energies(k) >= es.energies(k - 1));
}

}  // namespace

TEST_CASE("decoupled spectrum") {
  const SpaceSpec spec{2, 2, 3};
  const auto basis = build_space(spec);
  auto p = ModelParams::zeros(spec);
  p.delta << 0.7, 0.2;
  p.omega << 1.0, 1.5;
  std::vector<double> expected;
  for (Index i = 0; i < basis.size(); ++i) {
    const auto l = basis.label(i);
    double e = 0.0;
    for (int j = 0; j < 2; ++j) e += (l.spins[std::size_t(j)] == Spin::up ? 1.0 : -1.0) * p.delta(j);
    for (int m = 0; m < 2; ++m) e += l.photons[std::size_t(m)] * p.omega(m);
    expected.push_back(e);
  }
  std::sort(expected.begin(), expected.end());
  const auto es = eigensystem(spec, hamiltonian_mqrm(spec, p));
  for (Index k = 0; k < es.size(); ++k) CHECK(std::abs(es.energies(k) - expected[std::size_t(k)]) < 1e-14);
}

TEST_CASE("random Hermitian matrix") {
  const SpaceSpec spec{1, 1, 24};
  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  MatrixXc a = MatrixXc::NullaryExpr(50, 50, [&] { return cplx(dist(rng), dist(rng)); });
  const MatrixXc h = 0.5 * (a + a.adjoint());
  const auto es = eigensystem(spec, Operator(h, true));
  REQUIRE(es.size() == 50);
  check_eigensystem(h, es);
  CHECK(es.parity.front() == 0);
  const VectorXd ref = Eigen::SelfAdjointEigenSolver<MatrixXc>(h).eigenvalues();
  CHECK(max_abs(VectorXd(es.energies - ref)) < 1e-12);

  MatrixXc bad = h;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(eigensystem(spec, Operator(bad, false)), ShapeError);
}

TEST_CASE("parity sectors") {
  const SpaceSpec spec{2, 2, 4};
  auto p = uniform_coupling(spec, 0.8, 0.2, 0.5)(0.4);
  const Operator h = hamiltonian_rabi_stark(spec, p);
  const auto full = eigensystem(spec, h);
  const auto even = eigensystem(spec, h, Sector::even);
  const auto odd = eigensystem(spec, h, Sector::odd);
  check_eigensystem(h.matrix(), full);
  check_eigensystem(h.matrix(), even);
  CHECK(even.size() + odd.size() == full.size());
  const MatrixXc par = parity_operator(spec).matrix();
  for (Index k = 0; k < full.size(); ++k) {
    const int s = full.parity[std::size_t(k)];
    CHECK(std::abs(s) == 1);
    CHECK((par * full.states.col(k) - double(s) * full.states.col(k)).norm() < 1e-10);
  }
  for (int s : even.parity) CHECK(s == 1);
  // E = omega is an even level
  CHECK((even.energies.array() - 1.0).abs().minCoeff() < 1e-10);
  CHECK(parse_sector("odd") == Sector::odd);
  CHECK_THROWS(parse_sector("both"));
}

TEST_CASE("sweep of the two-mode Rabi model") {
  const SpaceSpec spec{2, 2, 12};
  const auto grid = linspace(0.0, 0.3, 16);
  const auto params = uniform_coupling(spec, 0.5, 0.5, 0.0);
  const auto sweep = sweep_spectrum(spec, params, grid);
  CHECK(sweep.flags.empty());
  CHECK(sweep.n_points() == 16);

  // g = 0 endpoint reproduces the decoupled levels
  const auto es0 = eigensystem(spec, hamiltonian_mqrm(spec, params(0.0)), Sector::even);
  CHECK(max_abs(VectorXd(sweep.levels.front().energies - es0.energies)) < 1e-14);

  const auto flat = find_flat_track(sweep, 1.0);
  REQUIRE(flat);
  CHECK(track_flatness(sweep, *flat) < 1e-8);

  // low tracks carry integer free-mode labels; the bijection holds at every point
  int lifted = 0;
  for (int t = 0; t < sweep.n_tracks(); ++t) {
    if (sweep.track_energies(t).maxCoeff() > 1.5) continue;
    const VectorXd nb = sweep.nb_labels[0].row(t).transpose();
    const double k = std::round(nb(0));
    CHECK((nb.array() - k).abs().maxCoeff() < 1e-8);
    if (k == 1.0) ++lifted;
  }
  CHECK(lifted > 0);
  for (const auto& ids : sweep.tracks) {
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) CHECK(sorted[k] == Index(k));
  }
}

TEST_CASE("single-mode and two-mode sweeps share the free-mode-vacuum tracks") {
  const SpaceSpec two{2, 2, 12};
  const SpaceSpec one{2, 1, 24};
  const auto grid = linspace(0.0, 0.4, 9);
  const auto s2 = sweep_spectrum(two, uniform_coupling(two, 0.5, 0.5, 0.0), grid);
  const auto s1 = sweep_spectrum(one, [&](double g) { return uniform_coupling(one, 0.5, 0.5, 0.0)(g * std::sqrt(2.0)); }, grid);
  int matched = 0;
  for (int t = 0; t < s2.n_tracks(); ++t) {
    if (s2.track_energies(t).maxCoeff() > 1.5 || s2.free_occupation(t).maxCoeff() > 0.5) continue;
    double best = 1e9;
    for (int u = 0; u < s1.n_tracks(); ++u)
      best = std::min(best, max_abs(VectorXd(s2.track_energies(t) - s1.track_energies(u))));
    CHECK(best < 1e-8);
    ++matched;
  }
  CHECK(matched >= 3);
}

TEST_CASE("adiabatic ratio") {
  const SpaceSpec spec{2, 1, 4};
  const auto params = uniform_coupling(spec, 0.8, 0.2, 0.0);
  const Operator h = hamiltonian_mqrm(spec, params(0.3));
  const auto es = eigensystem(spec, h, Sector::even);
  Index ref = 0;
  (es.energies.array() - 1.0).abs().minCoeff(&ref);
  const VectorXc psi = es.states.col(ref);

  const MatrixXc zero = MatrixXc::Zero(spec.dim(), spec.dim());
  for (const auto& r : adiabatic_ratio(zero, es, psi, 1.0).entries) CHECK(r.ratio == 0.0);

  // oracle: direct evaluation of |<m|Hdot|ref>| / (E_m - E_ref)^2
  auto rate = ModelParams::zeros(spec);
  rate.omega.setZero();
  rate.delta << -0.1, 0.1;
  rate.g.setConstant(0.05);
  const MatrixXc hdot = MatrixXc(MatrixXd(assemble_hamiltonian(build_space(spec), rate)).cast<cplx>());
  const auto rs = adiabatic_ratio(hdot, es, psi, 1.0);
  // the reference itself is listed among the degenerate levels
  CHECK(rs.entries.size() + rs.degenerate.size() == std::size_t(es.size()));
  for (const auto& r : rs.entries) {
    const cplx me = es.states.col(r.level).dot(hdot * psi);
    const double gap = es.energies(r.level) - 1.0;
    CHECK(r.ratio == doctest::Approx(std::abs(me) / (gap * gap)).epsilon(1e-12));
  }
}

TEST_CASE("effective gap on a decoupled model") {
  const SpaceSpec spec{2, 1, 4};
  const auto params = [&](double) {
    auto p = ModelParams::zeros(spec);
    p.delta << 0.7, 0.3;
    return p;
  };
  const auto sweep = sweep_spectrum(spec, params, {0.0, 0.5, 1.0});
  const auto ref = find_flat_track(sweep, 1.0);
  REQUIRE(ref);
  MatrixXd couplings = MatrixXd::Ones(sweep.n_tracks(), sweep.n_points());
  const auto gap = effective_min_gap(sweep, *ref, couplings);
  // oracle: closest even decoupled level away from E = D1 + D2
  double oracle = 1e9;
  const auto basis = build_space(spec);
  for (Index i = 0; i < basis.size(); ++i) {
    if (basis.parity(i) != 1) continue;
    const auto l = basis.label(i);
    const double e = (l.spins[0] == Spin::up ? 0.7 : -0.7) + (l.spins[1] == Spin::up ? 0.3 : -0.3) + l.photons[0];
    if (std::abs(e - 1.0) > 1e-8) oracle = std::min(oracle, std::abs(e - 1.0));
  }
  CHECK(gap.gap == doctest::Approx(oracle).epsilon(1e-12));

  couplings.setZero();
  CHECK_THROWS_AS(effective_min_gap(sweep, *ref, couplings), ConditionError);
}

TEST_CASE("amplitude relation and vanishing couplings along the Rabi protocol") {
  const auto info = standard_trajectory("fig1_rabi");
  const SpaceSpec spec{2, 2, 12};
  const auto grid = linspace(0.0, info.schedule.duration(), 21);
  const ParamsAt params = [&](double t) { return info.schedule.at(t); };
  const ParamsAt rates = [&](double t) { return info.schedule.slope(t); };
  const auto sweep = sweep_spectrum(spec, params, grid);
  LawCheckConfig cfg;
  cfg.params_at = params;
  cfg.rates_at = rates;
  const auto rep = matrix_element_law_check(spec, sweep, cfg);
  CHECK(rep.max_relation_residual < 1e-8);
  CHECK(rep.relations_checked > 0);
  CHECK(rep.reference_track >= 0);
  CHECK(rep.passed());

  // low tracks with a free-mode excitation do not couple to the dark state
  const auto couplings = track_couplings(spec, sweep, rep.reference_track, rates);
  int excluded = 0;
  for (int t = 0; t < sweep.n_tracks(); ++t)
    if (sweep.free_occupation(t).minCoeff() > 0.5 && sweep.track_energies(t).maxCoeff() < 1.5) {
      CHECK(couplings.row(t).maxCoeff() < 1e-12);
      ++excluded;
    }
  CHECK(excluded >= 2);
}

TEST_CASE("amplitude relation along a Stark protocol") {
  const auto info = standard_trajectory("fig3_stark_asym");
  const SpaceSpec spec{2, 2, 5};
  const auto grid = linspace(0.0, info.schedule.duration(), 11);
  LawCheckConfig cfg;
  cfg.params_at = [&](double t) { return info.schedule.at(t); };
  cfg.rates_at = [&](double t) { return info.schedule.slope(t); };
  cfg.family = DarkFamily::psi_2splus;
  const auto sweep = sweep_spectrum(spec, cfg.params_at, grid);
  const auto rep = matrix_element_law_check(spec, sweep, cfg);
  CHECK(rep.max_relation_residual < 1e-8);
  CHECK(rep.passed());
}
