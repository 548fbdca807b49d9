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

#include <numbers>

#include "rabi/dynamics.hpp"

using namespace rabi;

namespace {

ModelParams params_2q(const SpaceSpec& spec, double d1, double d2, double g, double u = 0.0) {
  auto p = ModelParams::zeros(spec);
  p.delta << d1, d2;
  p.g.setConstant(g);
  p.u.setConstant(u);
  return p;
}

}  // namespace

TEST_CASE("schedule interpolation and slopes") {
  const SpaceSpec spec{2, 1, 2};
  const auto a = params_2q(spec, 1.0, 0.0, 0.0);
  const auto b = params_2q(spec, 0.5, 0.5, 0.4, 0.2);
  const auto s = Schedule::linear(a, b, 2.0).then_hold(1.0);
  CHECK(s.duration() == 3.0);
  CHECK(s.n_segments() == 2);
  CHECK(s.at(1.0).g(0, 0) == doctest::Approx(0.2));
  CHECK(s.at(1.0).u(0, 1) == doctest::Approx(0.1));
  CHECK(s.slope(1.0).delta(0) == doctest::Approx(-0.25));
  CHECK(s.slope(2.5).g.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.at(10.0).g(0, 0) == doctest::Approx(0.4));
  CHECK(!s.constant_on(0));
  CHECK(s.constant_on(1));
  CHECK_THROWS_AS(Schedule({0.0, 1.0, 1.0}, {a, b, b}), ShapeError);
  CHECK_THROWS_AS(Schedule({0.5, 1.0}, {a, b}), ShapeError);
}

TEST_CASE("standard trajectories") {
  auto info = standard_trajectory("fig1_rabi");
  CHECK(info.schedule.duration_periods() == doctest::Approx(11.0));
  CHECK(info.schedule.values().back().g(0, 0) == doctest::Approx(0.3));
  CHECK(info.schedule.slope(1.0).g(1, 1) == doctest::Approx(0.3 / (11.0 * kTwoPi)));
  CHECK(info.schedule.slope(1.0).delta(1) == doctest::Approx(0.5 / (11.0 * kTwoPi)));
  CHECK(!info.schedule.values().back().has_stark());

  info = standard_trajectory("fig2_stark");
  CHECK(info.schedule.duration_periods() == doctest::Approx(1.86));
  CHECK(info.schedule.values().back().g(1, 0) == doctest::Approx(0.7));
  CHECK(info.schedule.values().front().u(0, 0) == 0.5);

  info = standard_trajectory("fig3_stark_asym");
  CHECK(info.schedule.duration_periods() == doctest::Approx(1.55));
  CHECK(info.schedule.values().back().u(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(info.schedule.values().back().u(0, 1) == doctest::Approx(1.0 / 3.0));

  TrajectoryOverrides ov;
  ov.modes = 3;
  VectorXd r(3);
  r << 1, 2, 3;
  ov.g_ratios = r;
  info = standard_trajectory("fig2_stark", ov);
  const MatrixXd g = info.schedule.values().back().g;
  CHECK(g.col(0).squaredNorm() == doctest::Approx(0.98));
  CHECK(g(2, 0) / g(0, 0) == doctest::Approx(3.0));
  CHECK(info.space.cutoff == default_cutoff(3));

  for (const auto& name : standard_trajectory_names()) {
    const auto t = standard_trajectory(name);
    const auto end = t.schedule.values().back();
    CHECK(end.delta.sum() == doctest::Approx(1.0));
    CHECK(t.schedule.values().front().delta(0) == 1.0);
  }
  CHECK_THROWS_AS(standard_trajectory("fig9"), ConfigError);
  TrajectoryOverrides bad;
  bad.delta1_end = 0.6;
  bad.delta2_end = 0.5;
  CHECK_THROWS_AS(standard_trajectory("fig2_stark", bad), ConditionError);
}

TEST_CASE("W targets") {
  const SpaceSpec two{2, 2, 1};
  const auto basis = build_space(two);
  const auto w = w_target(two, Eigen::Vector2d(1, 1));
  const double r = 0.5;
  CHECK(w.amplitudes()(basis.index({{Spin::down, Spin::up}, {1, 0}})).real() == doctest::Approx(r));
  CHECK(w.amplitudes()(basis.index({{Spin::up, Spin::down}, {0, 1}})).real() == doctest::Approx(-r));

  const VectorXd p = w_photons(Eigen::Vector3d(1, 2, 3));
  CHECK(p(0) == doctest::Approx(1.0 / std::sqrt(14.0)));
  CHECK(p(2) == doctest::Approx(3.0 / std::sqrt(14.0)));

  const SpaceSpec one{2, 1, 2};
  const auto b1 = build_space(one);
  const auto w1 = w_target(one, VectorXd::Ones(1), false);
  CHECK(std::abs(w1.amplitudes()(b1.index({{Spin::down, Spin::down}, {1}}))) == doctest::Approx(1.0));
  CHECK_THROWS_AS(w_target(two, Eigen::Vector2d::Zero()), ConditionError);
}

TEST_CASE("stationary states and energy conservation") {
  const SpaceSpec spec{2, 2, 4};
  const auto p = params_2q(spec, 0.8, 0.2, 0.3, 0.5);
  const auto sched = Schedule::constant(p, periods_to_time(10.0));
  const Operator h = hamiltonian_rabi_stark(spec, p);
  const auto es = eigensystem(spec, h);
  const VectorXc psi0 = es.states.col(3);
  SolverConfig cfg;
  cfg.samples = 11;
  auto res = propagate(sched, spec, psi0, cfg);
  CHECK(std::abs(std::abs(psi0.dot(res.final_state)) - 1.0) < 1e-8);
  CHECK(res.norm_drift < 1e-8);

  VectorXc mix = (es.states.col(0) + es.states.col(5) + cplx(0, 1) * es.states.col(17)).normalized();
  cfg.use_parity = false;
  res = propagate(sched, spec, mix, cfg);
  const double e0 = mix.dot(h.matrix() * mix).real();
  const double e1 = res.final_state.dot(h.matrix() * res.final_state).real();
  CHECK(std::abs(e1 - e0) < 1e-8);
  CHECK(res.norm_drift < 1e-8);
  CHECK_THROWS_AS(propagate(sched, spec, 2.0 * mix, cfg), ShapeError);
}

TEST_CASE("weak-coupling vacuum Rabi oscillation") {
  const SpaceSpec spec{1, 1, 3};
  const auto basis = build_space(spec);
  auto p = ModelParams::zeros(spec);
  p.delta << 0.5;
  p.g << 0.01;
  const double half = std::numbers::pi / (2.0 * 0.01);  // population of |up, 0> vanishes
  const auto sched = Schedule::constant(p, 2.0 * half);
  const VectorXc up0 = basis_state(basis, {{Spin::up}, {0}}).amplitudes();
  SolverConfig cfg;
  cfg.samples = 4001;
  cfg.tracked.push_back(TrackedState::fixed("up0", up0));
  const auto res = propagate(sched, spec, up0, cfg);
  Index k = 0;
  res.populations.col(0).head(2001).minCoeff(&k);
  // parabolic refinement of the first minimum
  const double dt = res.times[1] - res.times[0];
  const double ym = res.populations(k - 1, 0), y0 = res.populations(k, 0), yp = res.populations(k + 1, 0);
  const double t_min = res.times[std::size_t(k)] + 0.5 * dt * (ym - yp) / (ym - 2.0 * y0 + yp);
  CHECK(std::abs(t_min - half) / half < 1e-3);
  CHECK(y0 < 1e-3);
}

TEST_CASE("step halving converges at fifth order") {
  const auto info = standard_trajectory("fig2_stark");
  const SpaceSpec spec{2, 2, 4};
  const auto basis = build_space(spec);
  const VectorXc psi0 = basis_state(basis, {{Spin::up, Spin::up}, {0, 0}}).amplitudes();
  auto run = [&](double h) {
    SolverConfig cfg;
    cfg.samples = 2;
    cfg.integrator.fixed_step = h;
    return propagate(info.schedule, spec, psi0, cfg).final_state;
  };
  const VectorXc ref = run(0.005);
  const VectorXc s1 = run(0.1), s2 = run(0.05);
  const double e1 = (s1 - ref).norm(), e2 = (s2 - ref).norm();
  CHECK(e2 < 1e-6);
  CHECK(std::log2(e1 / e2) > 4.0);

  SolverConfig adaptive;
  adaptive.samples = 2;
  CHECK((propagate(info.schedule, spec, psi0, adaptive).final_state - ref).norm() < 1e-8);
}

TEST_CASE("W-state generation on the U = omega/2 protocol") {
  WGenerationConfig cfg;
  cfg.trajectory = "fig2_stark";
  cfg.track_dark_state = true;
  const auto r = run_w_generation(cfg);
  CHECK(r.fidelity >= 0.99);
  REQUIRE(r.check_fidelity);
  CHECK(std::abs(*r.check_fidelity - r.fidelity) < 1e-3);
  CHECK(r.converged);
  CHECK(r.result.norm_drift < 1e-8);
  CHECK(r.result.population_names.back() == "dark");

  cfg.overrides.periods = 1.86 * 0.25;
  cfg.track_dark_state = false;
  const auto fast = run_w_generation(cfg);
  CHECK(fast.fidelity < r.fidelity - 0.1);
}

TEST_CASE("instantaneous dark-state fidelity along the slow protocol") {
  WGenerationConfig cfg;
  cfg.trajectory = "figS2a";
  cfg.track_dark_state = true;
  cfg.check_convergence = false;
  const auto r = run_w_generation(cfg);
  const VectorXd dark = r.result.populations.col(r.result.populations.cols() - 1);
  CHECK(dark.minCoeff() >= 0.9);
  CHECK(dark.mean() >= 0.97);
  CHECK(r.fidelity == doctest::Approx(0.9995).epsilon(0.001));
}

TEST_CASE("mode-count independence") {
  WGenerationConfig cfg;
  cfg.trajectory = "fig2_stark";
  cfg.check_convergence = false;
  const auto rep = m_independence_check(cfg, {1, 2, 3});
  CHECK(rep.fidelities.size() == 3);
  CHECK(rep.fidelity_spread < 1e-3);

  // a thin tail reaches high photon numbers, so the state comparison needs a deep cutoff
  cfg.cutoff = 36;
  const auto deep = m_independence_check(cfg, {1, 2});
  CHECK(deep.fidelity_spread < 1e-9);
  CHECK(deep.max_reduced_distance < 1e-3);
  CHECK_THROWS_AS(m_independence_check(cfg, {}), ConfigError);
}

TEST_CASE("least-time search") {
  LeastTimeConfig cfg;
  cfg.u = 0.5;
  const auto r = least_time_search(cfg);
  REQUIRE(r.found);
  CHECK(r.t_min == doctest::Approx(1.86).epsilon(0.05 / 1.86));
  CHECK(r.fidelity >= 0.99);
  CHECK(r.monotone);

  // the plain Rabi model needs more than five periods
  cfg.u = 0.0;
  cfg.t_hi = 5.0;
  CHECK(!least_time_search(cfg).found);

  cfg.threshold = 1.5;
  CHECK_THROWS_AS(least_time_search(cfg), ConfigError);
}
