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


#include "rabi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "rabi/darkstates.hpp"
#include "rabi/export.hpp"
#include "rabi/parallel.hpp"

namespace rabi {

namespace {

std::string out_path(const CommandOptions& o, const RunConfig& rc, const std::string& suffix) {
  return (std::filesystem::path(o.out_dir) / (rc.output.prefix + "_" + suffix)).string();
}

void save_table(const CommandOptions& o, const RunConfig& rc, const std::string& command, const std::string& suffix,
                const Table& table, std::ostream& out) {
  std::ostringstream os;
  write_table(os, metadata_header(command, rc.file), table);
  const std::string path = out_path(o, rc, suffix);
  write_text_file(path, os.str());
  out << "wrote " << path << '\n';
}

std::string fmt(double v) { return format_number(v); }

VectorXc all_up_vacuum(const SpaceSpec& spec) {
  const BasisTable basis(spec);
  BasisLabel l;
  l.spins.assign(static_cast<std::size_t>(spec.n_qubits), Spin::up);
  l.photons.assign(static_cast<std::size_t>(spec.n_modes), 0);
  return basis_state(basis, l).amplitudes();
}

double max_population_gap(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("population tables differ in shape");
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

void apply_overrides(ConfigFile& file, const FlagOverrides& flags) {
  if (flags.cutoff) {
    if (*flags.cutoff < 1) throw ConfigError("--cutoff must be at least 1");
    file.set("model.cutoff", std::to_string(*flags.cutoff));
  }
  if (flags.engine) {
    parse_engine(*flags.engine);
    if (file.has_section("dissipation")) file.set("dissipation.engine", *flags.engine);
  }
  if (flags.sector) {
    parse_sector(*flags.sector);
    file.set("sweep.sector", *flags.sector);
  }
}

std::vector<std::string> command_names() { return {"spectrum", "dark-verify", "adiabatic", "master", "min-time"}; }

SweepPlan plan_sweep(const RunConfig& rc) {
  const SweepBlock& sw = rc.sweep;
  if (sw.points < 2 || sw.to == sw.from) rc.file.fail("sweep.points", "empty sweep range");
  SweepPlan plan;
  plan.x.resize(static_cast<std::size_t>(sw.points));
  for (int k = 0; k < sw.points; ++k)
    plan.x[static_cast<std::size_t>(k)] = sw.from + (sw.to - sw.from) * k / (sw.points - 1);

  if (sw.coordinate == "g") {
    const double gmax = rc.params.g.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0)) rc.file.fail("sweep.coordinate", "a coupling sweep needs a nonzero params.g pattern");
    const MatrixXd pattern = rc.params.g / gmax;
    plan.params_at = [base = rc.params, pattern](double g) {
      ModelParams p = base;
      p.g = g * pattern;
      return p;
    };
  } else {
    if (sw.from < 0.0 || sw.to > rc.schedule.duration_periods() + 1e-12)
      rc.file.fail("sweep.to", "time sweep leaves the schedule");
    plan.params_at = [sched = rc.schedule](double periods) { return sched.at(periods_to_time(periods)); };
  }
  return plan;
}

int cmd_spectrum(const RunConfig& rc, const CommandOptions& o, std::ostream& out) {
  const SweepBlock& sw = rc.sweep;
  const SweepPlan plan = plan_sweep(rc);
  const std::vector<double>& x = plan.x;
  const ParamsAt& params_at = plan.params_at;

  SweepOptions so;
  so.sector = sw.sector;
  so.threads = o.threads;
  so.keep_states = false;
  const SpectrumSweep sweep = sweep_spectrum(rc.space, params_at, x, so);
  save_table(o, rc, "spectrum", "spectrum.csv", spectrum_table(sweep, x), out);
  out << "spectrum " << sweep.n_points() << " points, " << sweep.n_tracks() << " tracks, sector "
      << to_string(sw.sector) << ", " << sweep.flags.size() << " tracking flags\n";
  for (double e : sw.flat_energies) {
    const auto t = find_flat_track(sweep, e);
    if (t)
      out << "flat track E=" << fmt(e) << ": track " << *t << ", spread " << fmt(track_flatness(sweep, *t)) << '\n';
    else
      out << "flat track E=" << fmt(e) << ": none\n";
  }

  if (sw.equivalence) {
    if (rc.space.n_modes == 1) {
      out << "equivalence: single-mode model, nothing to compare\n";
      return kExitOk;
    }
    const SpaceSpec spec1{rc.space.n_qubits, 1, rc.space.n_modes * rc.space.cutoff};
    std::vector<SpectrumEquivalenceReport> reps(x.size());
    parallel_for(x.size(), o.threads, [&](std::size_t k) {
      const ModelParams p = params_at(x[k]);
      reps[k] = spectrum_equivalence_report(rc.space, p, spec1, single_mode_reduction(p));
    });
    double worst = 0.0, offset = 0.0;
    std::size_t extra = 0;
    for (const auto& rep : reps) {
      worst = std::max(worst, rep.max_matched_discrepancy);
      offset = std::max(offset, rep.max_offset_error);
      extra = std::max(extra, rep.extra.size());
    }
    out << "equivalence: max matched discrepancy " << fmt(worst) << ", max K-offset error " << fmt(offset)
        << ", up to " << extra << " extra levels\n";
  }
  return kExitOk;
}

int cmd_dark_verify(const RunConfig& rc, const CommandOptions& o, std::ostream& out) {
  if (rc.dark.family.empty()) rc.file.fail("dark.family", "missing");
  DarkStateFamily fam;
  try {
    fam = parse_family(rc.dark.family);
  } catch (const ConfigError& e) {
    rc.file.fail("dark.family", e.what());
  }
  const SpaceSpec& spec = rc.space;
  const ModelParams& p = rc.params;
  std::vector<Certificate> certs;
  switch (fam) {
    case DarkStateFamily::psi_d: certs.push_back(psi_d(spec, p)); break;
    case DarkStateFamily::psi_2plus: certs.push_back(psi_2plus(spec, p)); break;
    case DarkStateFamily::psi_ds: certs.push_back(psi_ds(spec, p)); break;
    case DarkStateFamily::psi_2splus: certs.push_back(psi_2splus(spec, p)); break;
    case DarkStateFamily::psi_2s_odd_a: certs.push_back(psi_odd_parity(spec, p, OddVariant::a)); break;
    case DarkStateFamily::psi_2s_odd_b: certs.push_back(psi_odd_parity(spec, p, OddVariant::b)); break;
    case DarkStateFamily::psi_3s_minus: certs.push_back(psi_3s_minus(spec, p)); break;
    case DarkStateFamily::psi_N_composite: certs.push_back(psi_N_composite(spec, p, rc.dark.n_bell)); break;
    case DarkStateFamily::phi_K_lifted: {
      const SpaceSpec spec1{spec.n_qubits, 1, spec.cutoff};
      const ModelParams p1 = single_mode_reduction(p);
      const Certificate base = psi_ds(spec1, p1);
      std::vector<int> occ = rc.dark.occupations;
      if (occ.empty()) {
        occ.assign(static_cast<std::size_t>(spec.n_modes - 1), 0);
        if (!occ.empty()) occ[0] = 1;
      }
      certs.push_back(phi_K_state(spec, p, spec1, base.state.amplitudes(), base.energy, occ));
      break;
    }
    case DarkStateFamily::squeezed_down:
      certs.push_back(squeezed_dark_state(spec, p, rc.dark.xi > 0.0 ? rc.dark.xi : std::numeric_limits<double>::infinity()));
      break;
    case DarkStateFamily::nullspace: certs = one_photon_nullspace(spec, p, rc.dark.parity, rc.dark.energy); break;
  }

  std::ostringstream os;
  for (const auto& line : metadata_header("dark-verify", rc.file)) os << "# " << line << '\n';
  bool ok = true;
  for (std::size_t k = 0; k < certs.size(); ++k) {
    const Certificate& c = certs[k];
    os << "# certificate " << k << '\n' << to_record(c, spec);
    out << to_string(c.family) << ": energy " << fmt(c.energy) << ", residual " << fmt(c.residual) << ", parity "
        << c.parity << '\n';
    ok = ok && c.residual < rc.dark.tolerance;
  }
  if (certs.empty()) out << "no kernel vectors\n";
  write_text_file(out_path(o, rc, "certificate.txt"), os.str());
  out << "wrote " << out_path(o, rc, "certificate.txt") << '\n';

  if (rc.dark.nullspace_check && !certs.empty() && fam != DarkStateFamily::nullspace) {
    const Certificate& c = certs.front();
    const auto kernel = one_photon_nullspace(spec, p, c.parity, c.energy);
    double best = 0.0;
    for (const auto& k : kernel) best = std::max(best, std::abs(k.state.overlap(c.state)));
    out << "nullspace overlap " << fmt(best) << " over " << kernel.size() << " kernel vectors\n";
    ok = ok && best > 1.0 - 1e-10;
  }
  if (!ok) out << "verification failed at tolerance " << fmt(rc.dark.tolerance) << '\n';
  return ok ? kExitOk : kExitConvergence;
}

WGenerationConfig generation_config(const RunConfig& rc) {
  WGenerationConfig wc;
  if (rc.trajectory) {
    wc.trajectory = *rc.trajectory;
    wc.overrides = rc.overrides;
  } else {
    wc.custom = TrajectoryInfo{"custom", rc.space, rc.schedule};
  }
  wc.cutoff = rc.space.cutoff;
  wc.solver.integrator = rc.solver.integrator;
  wc.solver.samples = rc.solver.samples;
  wc.check_convergence = rc.solver.check_convergence;
  wc.auto_escalate = rc.solver.auto_escalate;
  wc.max_cutoff = rc.solver.max_cutoff;
  wc.convergence_tol = rc.solver.convergence_tol;
  return wc;
}

int cmd_adiabatic(const RunConfig& rc, const CommandOptions& o, std::ostream& out) {
  const WGenerationResult r = run_w_generation(generation_config(rc));
  save_table(o, rc, "adiabatic", "trajectory.csv", trajectory_table(r.result, rc.output.stride), out);

  out << "fidelity " << fmt(r.fidelity) << " at T=" << fmt(rc.schedule.duration_periods()) << " periods, cutoff "
      << r.space.cutoff;
  if (r.check_fidelity) out << " (cutoff " << r.check_cutoff << ": " << fmt(*r.check_fidelity) << ")";
  out << ", norm drift " << fmt(r.result.norm_drift) << '\n';

  if (rc.diagnostics.enabled) {
    if (r.space.dim() / 2 > kDenseLimit) {
      out << "diagnostics skipped: sector dimension above " << kDenseLimit << '\n';
    } else {
      DiagnosticsConfig dc;
      dc.points = rc.diagnostics.points;
      dc.reference_energy = rc.diagnostics.reference_energy;
      dc.exclusion.min_ratio = rc.diagnostics.min_ratio;
      dc.threads = o.threads;
      try {
        const AdiabaticDiagnostics d = adiabatic_diagnostics(r.trajectory.schedule, r.space, dc);
        out << "effective min gap " << fmt(d.gap.gap) << " at t=" << fmt(time_to_periods(d.sweep.grid[static_cast<std::size_t>(d.gap.point)]))
            << " periods; max R " << fmt(d.max_ratio) << " over the " << d.nearest.tracks.size() << " nearest levels\n";
        Table t;
        t.columns = {"t_periods", "e_ref"};
        for (int k : d.nearest.tracks) {
          t.columns.push_back("e_" + std::to_string(k));
          t.columns.push_back("r_" + std::to_string(k));
        }
        const MatrixXd ratio = ratio_table(d.sweep, d.reference_track, d.couplings);
        t.data.resize(d.sweep.n_points(), static_cast<Index>(t.columns.size()));
        for (Index p = 0; p < d.sweep.n_points(); ++p) {
          Index c = 0;
          t.data(p, c++) = time_to_periods(d.sweep.grid[static_cast<std::size_t>(p)]);
          t.data(p, c++) = d.sweep.energy(d.reference_track, p);
          for (int k : d.nearest.tracks) {
            t.data(p, c++) = d.sweep.energy(k, p);
            t.data(p, c++) = ratio(k, p);
          }
        }
        save_table(o, rc, "adiabatic", "diagnostics.csv", t, out);
      } catch (const ConditionError& e) {
        out << "diagnostics unavailable: " << e.what() << '\n';
      }
    }
  }

  if (!r.converged) {
    out << "cutoff not converged within " << fmt(rc.solver.convergence_tol) << '\n';
    if (!o.allow_unconverged) return kExitConvergence;
  }
  return kExitOk;
}

int cmd_master(const RunConfig& rc, const CommandOptions& o, std::ostream& out) {
  if (!rc.dissipation) throw ConfigError(rc.file.source() + ": master needs a dissipation block");
  const DissipationBlock& d = *rc.dissipation;
  const Engine other = d.engine == Engine::lindblad ? Engine::dressed : Engine::lindblad;

  if (d.release_periods && rc.trajectory && d.initial == "vacuum") {
    if ((d.gamma.array() != d.gamma(0)).any()) rc.file.fail("dissipation.gamma", "catch and release uses one rate for both qubits");
    if ((d.gamma_phi.array() != d.gamma_phi(0)).any())
      rc.file.fail("dissipation.gamma_phi", "catch and release uses one rate for both qubits");
    CatchReleaseConfig c;
    c.trajectory = *rc.trajectory;
    c.overrides = rc.overrides;
    c.cutoff = rc.space.cutoff;
    c.kappa_in = d.kappa_in;
    c.gamma = d.gamma(0);
    c.gamma_phi = d.gamma_phi(0);
    c.kappa_c = d.kappa_c;
    c.release_periods = *d.release_periods;
    c.end_periods = d.end_periods;
    c.ramp = d.ramp;
    c.engine = d.engine;
    c.integrator = rc.solver.integrator;
    c.samples = d.samples;
    const CatchReleaseReport rep = catch_and_release(c);
    save_table(o, rc, "master", "master.csv", open_trajectory_table(rep.trajectory, rc.output.stride), out);
    out << "engine " << to_string(d.engine) << ", cutoff " << rep.space.cutoff << '\n';
    out << "generation fidelity " << fmt(rep.generation_fidelity) << ", at release " << fmt(rep.release_fidelity)
        << ", hold loss " << fmt(rep.hold_fidelity_loss) << '\n';
    out << "trace drift " << fmt(rep.trajectory.max_trace_drift) << ", min eigenvalue "
        << fmt(rep.trajectory.min_eigenvalue) << '\n';
    for (Index i = 0; i < rep.integrated_emission.size(); ++i)
      out << "line " << i << ": emission " << fmt(rep.integrated_emission(i)) << ", fraction "
          << fmt(rep.emission_fractions(i)) << " (W amplitude " << fmt(rep.expected_fractions(i))
          << "), rate fraction at release " << fmt(rep.release_rate_fractions.size() ? rep.release_rate_fractions(i) : 0.0)
          << '\n';
    if (d.compare_engines) {
      c.engine = other;
      const CatchReleaseReport alt = catch_and_release(c);
      out << "engine gap " << fmt(max_population_gap(rep.trajectory.populations, alt.trajectory.populations))
          << " (" << to_string(other) << ")\n";
    }
    return kExitOk;
  }

  MasterConfig mc;
  mc.space = rc.space;
  mc.schedule = rc.schedule;
  mc.rates.kappa_in = d.kappa_in;
  if (d.release_periods) {
    mc.rates.kappa_c = PiecewiseConstant::step(0.0, periods_to_time(*d.release_periods), d.kappa_c);
    mc.rates.kappa_c.ramp = d.ramp;
  } else {
    mc.rates.kappa_c = PiecewiseConstant::constant(d.kappa_c);
  }
  mc.rates.gamma = d.gamma;
  mc.rates.gamma_phi = d.gamma_phi;
  mc.t_end = periods_to_time(d.end_periods);
  mc.engine = d.engine;
  mc.integrator = rc.solver.integrator;
  mc.samples = d.samples;

  const VectorXd g_end = rc.schedule.values().back().g.col(0);
  const bool has_w = g_end.norm() > 0.0 && rc.space.cutoff >= 1;
  VectorXc psi0;
  if (d.initial == "w") {
    if (!has_w) rc.file.fail("dissipation.initial", "a W state needs nonzero final couplings");
    psi0 = w_target(rc.space, g_end, rc.space.n_qubits == 2).amplitudes();
  } else {
    psi0 = all_up_vacuum(rc.space);
  }
  mc.tracked.push_back(TrackedState::fixed("initial", psi0));
  if (has_w && rc.space.n_qubits == 2) {
    const VectorXc w = w_target(rc.space, g_end).amplitudes();
    mc.tracked.push_back(TrackedState::fixed("w_singlet", w));
    mc.target = TrackedState::fixed("target", w);
  }
  const OpenTrajectoryResult r = propagate_master(DensityMatrix::pure(psi0), mc);
  save_table(o, rc, "master", "master.csv", open_trajectory_table(r, rc.output.stride), out);
  out << "engine " << to_string(d.engine) << ", cutoff " << rc.space.cutoff << ", t_end "
      << fmt(d.end_periods) << " periods\n";
  if (r.fidelity.size()) out << "final fidelity " << fmt(r.fidelity(r.fidelity.size() - 1)) << '\n';
  for (std::size_t s = 0; s < r.population_names.size(); ++s)
    out << "final population " << r.population_names[s] << ' '
        << fmt(r.populations(r.populations.rows() - 1, static_cast<Index>(s))) << '\n';
  out << "trace drift " << fmt(r.max_trace_drift) << ", min eigenvalue " << fmt(r.min_eigenvalue) << '\n';
  if (r.integrated_emission.sum() > 0.0)
    for (Index i = 0; i < r.integrated_emission.size(); ++i)
      out << "line " << i << ": emission " << fmt(r.integrated_emission(i)) << '\n';
  if (d.compare_engines) {
    mc.engine = other;
    const OpenTrajectoryResult alt = propagate_master(DensityMatrix::pure(psi0), mc);
    out << "engine gap " << fmt(max_population_gap(r.populations, alt.populations)) << " (" << to_string(other)
        << ")\n";
  }
  return kExitOk;
}

int cmd_min_time(const RunConfig& rc, const CommandOptions& o, std::ostream& out) {
  LeastTimeConfig cfg = rc.min_time.search;
  cfg.threads = o.threads;
  Table t;
  t.columns = {"u", "found", "t_min_periods", "g_best", "fidelity", "monotone", "evaluations"};
  t.data.resize(static_cast<Index>(rc.min_time.u_grid.size()), 7);
  Index row = 0;
  for (double u : rc.min_time.u_grid) {
    cfg.u = u;
    const LeastTimeResult r = least_time_search(cfg);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.data.row(row++) << u, r.found ? 1.0 : 0.0, r.found ? r.t_min : nan, r.found ? r.g_best : nan,
        r.found ? r.fidelity : nan, r.monotone ? 1.0 : 0.0, static_cast<double>(r.evaluations);
    if (r.found)
      out << "U=" << fmt(u) << ": T_min " << fmt(r.t_min) << " periods (g_max " << fmt(r.g_best) << ", fidelity "
          << fmt(r.fidelity) << ")\n";
    else
      out << "U=" << fmt(u) << ": threshold not reached below " << fmt(cfg.t_hi) << " periods\n";
  }
  save_table(o, rc, "min-time", "mintime.csv", t, out);
  return kExitOk;
}

int run_command(const std::string& command, const std::string& config_path, const FlagOverrides& flags,
                const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
      throw ConfigError("unknown command '" + command + "'");
    ConfigFile file = ConfigFile::load(config_path);
    apply_overrides(file, flags);
    const RunConfig rc = load_run_config(file);
    if (command == "spectrum") return cmd_spectrum(rc, options, out);
    if (command == "dark-verify") return cmd_dark_verify(rc, options, out);
    if (command == "adiabatic") return cmd_adiabatic(rc, options, out);
    if (command == "master") return cmd_master(rc, options, out);
    return cmd_min_time(rc, options, out);
  } catch (const ConditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCondition;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace rabi
