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

#include "rabi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rabi/darkstates.hpp"
#include "rabi/parallel.hpp"

namespace rabi {

TrackedState TrackedState::fixed(std::string name, VectorXc psi) {
  return {std::move(name), [psi = std::move(psi)](double) { return psi; }};
}

namespace {

constexpr cplx kMinusI{0.0, -1.0};

// y = -i (a + tau b) x for real row-major a, b.
void apply_linear(const SparseXd& a, const SparseXd& b, double tau, const VectorXc& x, VectorXc& y) {
  y.resize(x.size());
  const bool has_b = tau != 0.0 && b.nonZeros() > 0;
  for (Index r = 0; r < a.outerSize(); ++r) {
    cplx s = 0.0;
    for (SparseXd::InnerIterator it(a, r); it; ++it) s += it.value() * x(it.col());
    if (has_b) {
      cplx sb = 0.0;
      for (SparseXd::InnerIterator it(b, r); it; ++it) sb += it.value() * x(it.col());
      s += tau * sb;
    }
    y(r) = kMinusI * s;
  }
}

std::vector<Index> propagation_indices(const BasisTable& basis, const VectorXc& psi, bool use_parity) {
  if (use_parity) {
    for (int p : {1, -1}) {
      const auto idx = basis.sector(p);
      double w = 0.0;
      for (Index i : idx) w += std::norm(psi(i));
      if (w >= 1.0 - 1e-14) return idx;
    }
  }
  std::vector<Index> all(static_cast<std::size_t>(basis.size()));
  for (Index i = 0; i < basis.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

std::vector<double> sample_times(double t_end, int samples) {
  const int n = std::max(samples, 2);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = t_end * k / (n - 1);
  t.back() = t_end;
  return t;
}

}  // namespace

TrajectoryResult propagate(const Schedule& schedule, const SpaceSpec& spec, const VectorXc& psi0,
                           const SolverConfig& config) {
  const BasisTable basis = build_space(spec);
  if (psi0.size() != basis.size()) throw ShapeError("initial state does not match the space");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ShapeError("initial state must be normalized");
  schedule.validate(spec);

  const auto idx = propagation_indices(basis, psi0, config.use_parity);
  const bool restricted = static_cast<Index>(idx.size()) != basis.size();
  auto reduce = [&](const SparseXd& m) { return restricted ? restrict_to(m, idx) : m; };

  const int nseg = schedule.n_segments();
  std::vector<SparseXd> ha(static_cast<std::size_t>(nseg)), hb(static_cast<std::size_t>(nseg));
  for (int s = 0; s < nseg; ++s) {
    const double t0 = schedule.knots()[static_cast<std::size_t>(s)];
    ha[static_cast<std::size_t>(s)] = reduce(assemble_hamiltonian(basis, schedule.at(t0)));
    SparseXd b = reduce(assemble_hamiltonian(basis, schedule.slope(t0)));
    b.prune(0.0);
    hb[static_cast<std::size_t>(s)] = std::move(b);
  }

  VectorXc y(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) y(static_cast<Index>(k)) = psi0(idx[k]);

  int seg = 0;
  double seg_t0 = 0.0;
  auto rhs = [&](double t, const VectorXc& x, VectorXc& dx) {
    apply_linear(ha[static_cast<std::size_t>(seg)], hb[static_cast<std::size_t>(seg)], t - seg_t0, x, dx);
  };
  auto stepper = make_integrator<VectorXc>(rhs, config.integrator);

  const auto times = sample_times(schedule.duration(), config.samples);
  TrajectoryResult res;
  res.times = times;
  const auto ns = static_cast<Index>(times.size());
  res.populations = MatrixXd::Zero(ns, static_cast<Index>(config.tracked.size()));
  for (const auto& ts : config.tracked) res.population_names.push_back(ts.name);
  if (config.target) res.fidelity = VectorXd::Zero(ns);

  VectorXc full = VectorXc::Zero(basis.size());
  auto record = [&](Index k, double t) {
    for (std::size_t j = 0; j < idx.size(); ++j) full(idx[j]) = y(static_cast<Index>(j));
    res.norm_drift = std::max(res.norm_drift, std::abs(y.norm() - 1.0));
    for (std::size_t s = 0; s < config.tracked.size(); ++s)
      res.populations(k, static_cast<Index>(s)) = std::norm(config.tracked[s].at(t).dot(full));
    if (config.target) res.fidelity(k) = std::norm(config.target->at(t).dot(full));
    if (config.keep_snapshots) res.snapshots.push_back(full);
  };

  double t = 0.0;
  record(0, 0.0);
  for (Index k = 1; k < ns; ++k) {
    const double stop = times[static_cast<std::size_t>(k)];
    while (t < stop) {
      seg = schedule.segment(t);
      seg_t0 = schedule.knots()[static_cast<std::size_t>(seg)];
      const double seg_end = schedule.knots()[static_cast<std::size_t>(seg) + 1];
      const double next = std::min(stop, seg_end);
      stepper.advance(y, t, next);
    }
    record(k, t);
  }
  res.final_state = full;
  if (config.target) res.final_fidelity = res.fidelity(ns - 1);
  res.stats = stepper.stats();
  return res;
}

VectorXd w_photons(const VectorXd& g) {
  const double n = g.norm();
  if (g.size() == 0 || n == 0.0) throw ConditionError("nonzero g", "a W state needs a nonzero coupling vector");
  return g / n;
}

PureState w_target(const SpaceSpec& spec, const VectorXd& g, bool singlet) {
  if (g.size() != spec.n_modes) throw ShapeError("coupling vector length differs from the mode count");
  if (spec.cutoff < 1) throw ShapeError("a W state needs cutoff >= 1");
  if (singlet && spec.n_qubits != 2) throw ShapeError("the singlet needs exactly two qubits");
  const VectorXd w = w_photons(g);
  const BasisTable basis(spec);
  VectorXc psi = VectorXc::Zero(basis.size());
  for (int i = 0; i < spec.n_modes; ++i) {
    BasisLabel l;
    l.photons.assign(static_cast<std::size_t>(spec.n_modes), 0);
    l.photons[static_cast<std::size_t>(i)] = 1;
    if (singlet) {
      const double s = w(i) / std::sqrt(2.0);
      l.spins = {Spin::down, Spin::up};
      psi(basis.index(l)) += s;
      l.spins = {Spin::up, Spin::down};
      psi(basis.index(l)) -= s;
    } else {
      l.spins.assign(static_cast<std::size_t>(spec.n_qubits), Spin::down);
      psi(basis.index(l)) += w(i);
    }
  }
  return PureState(psi);
}

namespace {

VectorXc vacuum_up(const BasisTable& basis) {
  const auto& spec = basis.spec();
  BasisLabel l;
  l.spins.assign(static_cast<std::size_t>(spec.n_qubits), Spin::up);
  l.photons.assign(static_cast<std::size_t>(spec.n_modes), 0);
  return basis_state(basis, l).amplitudes();
}

TrajectoryResult run_once(const TrajectoryInfo& info, const SpaceSpec& spec, const WGenerationConfig& cfg) {
  const BasisTable basis = build_space(spec);
  const ModelParams end = info.schedule.values().back();
  const VectorXc target = w_target(spec, end.g.col(0)).amplitudes();
  const VectorXc psi0 = vacuum_up(basis);
  SolverConfig sc = cfg.solver;
  sc.target = TrackedState::fixed("target", target);
  sc.tracked.insert(sc.tracked.begin(), TrackedState::fixed("vacuum_up_up", psi0));
  sc.tracked.insert(sc.tracked.begin() + 1, TrackedState::fixed("w_singlet", target));
  if (cfg.track_dark_state) {
    const Schedule sched = info.schedule;
    sc.tracked.push_back({"dark", [spec, sched](double t) {
                            return psi_2splus(spec, sched.at(t)).state.amplitudes();
                          }});
  }
  return propagate(info.schedule, spec, psi0, sc);
}

}  // namespace

WGenerationResult run_w_generation(const WGenerationConfig& config) {
  WGenerationResult out;
  out.trajectory = config.custom ? *config.custom : standard_trajectory(config.trajectory, config.overrides);
  int c = config.cutoff > 0 ? config.cutoff : out.trajectory.space.cutoff;
  SpaceSpec spec = out.trajectory.space;
  spec.cutoff = c;
  out.result = run_once(out.trajectory, spec, config);
  out.fidelity = out.result.final_fidelity;
  out.space = spec;
  if (!config.check_convergence) return out;

  while (true) {
    SpaceSpec check = spec;
    check.cutoff = c + 2;
    const TrajectoryResult r2 = run_once(out.trajectory, check, config);
    out.check_fidelity = r2.final_fidelity;
    out.check_cutoff = check.cutoff;
    out.converged = std::abs(r2.final_fidelity - out.fidelity) < config.convergence_tol;
    if (out.converged || !config.auto_escalate || check.cutoff + 2 > config.max_cutoff) break;
    c += 2;
    spec.cutoff = c;
    out.result = r2;
    out.fidelity = r2.final_fidelity;
    out.space = spec;
  }
  return out;
}

AdiabaticDiagnostics adiabatic_diagnostics(const Schedule& schedule, const SpaceSpec& spec,
                                           const DiagnosticsConfig& config) {
  if (config.points < 2) throw ConfigError("diagnostics need at least two points");
  std::vector<double> grid(static_cast<std::size_t>(config.points));
  for (int k = 0; k < config.points; ++k)
    grid[static_cast<std::size_t>(k)] = schedule.duration() * k / (config.points - 1);
  SweepOptions so;
  so.sector = config.sector;
  so.threads = config.threads;
  AdiabaticDiagnostics d;
  d.sweep = sweep_spectrum(spec, [&](double t) { return schedule.at(t); }, grid, so);
  const auto ref = find_flat_track(d.sweep, config.reference_energy);
  if (!ref) throw ConditionError("flat reference track", "no level stays at E = " + std::to_string(config.reference_energy));
  d.reference_track = *ref;
  d.couplings = track_couplings(spec, d.sweep, d.reference_track, [&](double t) { return schedule.slope(t); });
  d.gap = effective_min_gap(d.sweep, d.reference_track, d.couplings, config.exclusion);
  d.nearest = nearest_levels(d.sweep, d.reference_track, d.couplings, config.nearest);
  d.max_ratio = d.nearest.peak_ratio.maxCoeff();
  return d;
}

namespace {

double fig2_fidelity(const LeastTimeConfig& cfg, double periods, double g) {
  TrajectoryOverrides ov;
  ov.periods = periods;
  ov.g_max = g;
  ov.u = cfg.u;
  WGenerationConfig wc;
  wc.trajectory = "fig2_stark";
  wc.overrides = ov;
  wc.cutoff = cfg.cutoff;
  wc.check_convergence = false;
  wc.solver.samples = 2;
  wc.solver.integrator = cfg.integrator;
  return run_w_generation(wc).fidelity;
}

}  // namespace

std::pair<double, double> best_fidelity_at(const LeastTimeConfig& cfg, double periods, int* evaluations) {
  std::vector<double> grid;
  for (int k = 1;; ++k) {
    const double g = cfg.g_lo + k * cfg.g_step;
    if (g >= cfg.g_hi - 1e-12) break;
    grid.push_back(g);
  }
  if (grid.empty()) throw ConfigError("empty g_max grid");
  std::vector<double> f(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t k) { f[k] = fig2_fidelity(cfg, periods, grid[k]); });
  int evals = static_cast<int>(grid.size());
  const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
  double best_f = f[best];
  double best_g = grid[best];

  // Golden-section refinement around the best grid point.
  double a = std::max(cfg.g_lo + 1e-9, best_g - cfg.g_step);
  double b = std::min(cfg.g_hi - 1e-9, best_g + cfg.g_step);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = fig2_fidelity(cfg, periods, x1), f2 = fig2_fidelity(cfg, periods, x2);
  evals += 2;
  while (b - a > 2e-3) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = fig2_fidelity(cfg, periods, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = fig2_fidelity(cfg, periods, x2);
    }
    ++evals;
  }
  for (auto [x, fx] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (fx > best_f) {
      best_f = fx;
      best_g = x;
    }
  }
  if (evaluations) *evaluations += evals;
  return {best_f, best_g};
}

LeastTimeResult least_time_search(const LeastTimeConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (!(cfg.t_step > 0.0 && cfg.t_tol > 0.0 && cfg.t_hi >= cfg.t_lo && cfg.t_lo > 0.0))
    throw ConfigError("invalid duration grid");
  LeastTimeResult res;
  const int nt = static_cast<int>(std::floor((cfg.t_hi - cfg.t_lo) / cfg.t_step + 1e-9));
  double hi = -1.0;
  std::pair<double, double> at_hi;
  for (int k = 0; k <= nt; ++k) {
    const double t = cfg.t_lo + k * cfg.t_step;
    const auto fg = best_fidelity_at(cfg, t, &res.evaluations);
    if (fg.first >= cfg.threshold) {
      hi = t;
      at_hi = fg;
      break;
    }
  }
  if (hi < 0.0) return res;

  double lo = std::max(hi - cfg.t_step, 1e-6);
  if (hi == cfg.t_lo) lo = hi;
  while (hi - lo > cfg.t_tol) {
    const double mid = 0.5 * (lo + hi);
    const auto fg = best_fidelity_at(cfg, mid, &res.evaluations);
    if (fg.first >= cfg.threshold) {
      hi = mid;
      at_hi = fg;
    } else {
      lo = mid;
    }
  }
  res.found = true;
  res.t_min = hi;
  res.fidelity = at_hi.first;
  res.g_best = at_hi.second;
  res.monotone = best_fidelity_at(cfg, hi + cfg.t_tol, &res.evaluations).first >= cfg.threshold;
  return res;
}

MIndependenceReport m_independence_check(const WGenerationConfig& base, const std::vector<int>& modes) {
  if (modes.empty()) throw ConfigError("mode list is empty");
  MIndependenceReport rep;
  rep.modes = modes;

  auto run_for = [&](int m) {
    WGenerationConfig c = base;
    c.overrides.modes = m;
    c.overrides.g_ratios.reset();
    c.solver.keep_snapshots = true;
    return run_w_generation(c);
  };
  const WGenerationResult ref = run_for(1);
  const double g2_ref = ref.trajectory.schedule.values().back().g.col(0).squaredNorm();
  const BasisTable basis1(ref.space);

  for (int m : modes) {
    const WGenerationResult r = m == 1 ? ref : run_for(m);
    const ModelParams end = r.trajectory.schedule.values().back();
    if (std::abs(end.g.col(0).squaredNorm() - g2_ref) > 1e-12)
      throw ConditionError("equal sum_i g_i^2", "total coupling differs between mode counts");
    rep.fidelities.push_back(r.fidelity);
    if (m == 1) continue;

    const BasisTable basis(r.space);
    const BogoliubovFrame frame = bogoliubov_frame(end.g.col(0));
    const SparseXd bdag = SparseXd(sparse_b_operator(basis, frame, 0).transpose());
    const int nmax = std::min(r.space.cutoff, ref.space.cutoff);
    std::vector<std::pair<VectorXc, Index>> pairs;
    for (Index q = 0; q < basis1.spec().qubit_dim(); ++q) {
      BasisLabel l1 = basis1.label(q * basis1.spec().photon_dim());
      BasisLabel lm;
      lm.spins = l1.spins;
      lm.photons.assign(static_cast<std::size_t>(m), 0);
      VectorXd v = basis_state(basis, lm).amplitudes().real();
      for (int n = 0; n <= nmax; ++n) {
        if (n > 0) v = bdag * v / std::sqrt(static_cast<double>(n));
        l1.photons = {n};
        pairs.emplace_back(v.cast<cplx>(), basis1.index(l1));
      }
    }
    for (std::size_t k = 0; k < r.result.snapshots.size(); ++k) {
      double d2 = 0.0;
      for (const auto& [v, i1] : pairs)
        d2 += std::norm(v.dot(r.result.snapshots[k]) - ref.result.snapshots[k](i1));
      rep.max_reduced_distance = std::max(rep.max_reduced_distance, std::sqrt(d2));
    }
  }
  const auto [mn, mx] = std::minmax_element(rep.fidelities.begin(), rep.fidelities.end());
  rep.fidelity_spread = *mx - *mn;
  return rep;
}

}  // namespace rabi
