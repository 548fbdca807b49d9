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

#include "rabi/openquantum.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "rabi/spectra.hpp"

namespace rabi {

DensityMatrix::DensityMatrix(MatrixXc rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw ShapeError("density matrix must be square");
}

DensityMatrix DensityMatrix::pure(const VectorXc& psi) { return DensityMatrix(psi * psi.adjoint()); }

double DensityMatrix::trace_defect() const { return std::abs(rho_.trace() - 1.0); }

double DensityMatrix::hermiticity_defect() const { return max_abs(rho_ - rho_.adjoint()); }

double DensityMatrix::min_eigenvalue() const {
  const MatrixXc h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> sol(h, Eigen::EigenvaluesOnly);
  return sol.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (hermiticity_defect() >= 1e-10) throw ShapeError("density matrix is not Hermitian");
  if (trace_defect() >= 1e-8) throw ShapeError("density matrix trace differs from 1");
  if (min_eigenvalue() <= -1e-8) throw ShapeError("density matrix has a negative eigenvalue");
}

double PiecewiseConstant::at(double t) const {
  if (values.size() != switch_times.size() + 1) throw ShapeError("piecewise-constant values do not match switches");
  double v = values.front();
  for (std::size_t k = 0; k < switch_times.size(); ++k) {
    const double ts = switch_times[k];
    if (t < ts) break;
    const double a = values[k];
    const double b = values[k + 1];
    v = (ramp > 0.0 && t < ts + ramp) ? a + (b - a) * (t - ts) / ramp : b;
  }
  return v;
}

std::vector<double> PiecewiseConstant::breakpoints() const {
  std::vector<double> out;
  for (double ts : switch_times) {
    out.push_back(ts);
    if (ramp > 0.0) out.push_back(ts + ramp);
  }
  return out;
}

void DissipationRates::validate(const SpaceSpec& spec) const {
  if (!(kappa_in >= 0.0)) throw ConfigError("kappa_in must be non-negative");
  for (double v : kappa_c.values)
    if (!(v >= 0.0)) throw ConfigError("kappa_c must be non-negative");
  if (kappa_c.values.size() != kappa_c.switch_times.size() + 1)
    throw ConfigError("kappa_c needs one more value than switch times");
  if (!std::is_sorted(kappa_c.switch_times.begin(), kappa_c.switch_times.end()))
    throw ConfigError("kappa_c switch times must be non-decreasing");
  if (kappa_c.ramp < 0.0) throw ConfigError("ramp must be non-negative");
  for (const VectorXd* v : {&gamma, &gamma_phi}) {
    if (v->size() != 0 && v->size() != spec.n_qubits) throw ShapeError("qubit rate list has the wrong length");
    if (v->size() != 0 && (v->array() < 0.0).any()) throw ConfigError("qubit rates must be non-negative");
  }
}

bool DissipationRates::all_zero() const {
  const bool kc = std::all_of(kappa_c.values.begin(), kappa_c.values.end(), [](double v) { return v == 0.0; });
  return kappa_in == 0.0 && kc && (gamma.size() == 0 || gamma.isZero(0.0)) &&
         (gamma_phi.size() == 0 || gamma_phi.isZero(0.0));
}

LindbladGenerator::LindbladGenerator(const BasisTable& basis) {
  const auto& spec = basis.spec();
  n_total_.resize(basis.size());
  for (Index i = 0; i < basis.size(); ++i) n_total_(i) = basis.total_photons(i);
  for (int i = 0; i < spec.n_modes; ++i) {
    a_.push_back(sparse_annihilator(basis, i));
  }
  for (int m = 0; m < spec.n_qubits; ++m) {
    sm_.push_back(sparse_lowering(basis, m));
    VectorXd up(basis.size()), sz(basis.size());
    for (Index i = 0; i < basis.size(); ++i) {
      const bool u = basis.spin(i, m) == Spin::up;
      up(i) = u ? 1.0 : 0.0;
      sz(i) = u ? 1.0 : -1.0;
    }
    up_.push_back(up);
    sz_.push_back(sz);
  }
}

void LindbladGenerator::apply(const SparseXd& h, double kappa, const DissipationRates& rates, const MatrixXc& rho,
                              MatrixXc& drho) const {
  VectorXd damp = 0.5 * kappa * n_total_;
  for (std::size_t m = 0; m < sm_.size(); ++m) damp += 0.5 * rates.gamma_of(static_cast<int>(m)) * up_[m];

  MatrixXc a = h * rho;
  a *= cplx(0.0, -1.0);
  a -= damp.asDiagonal() * rho;
  drho = a + a.adjoint();

  // L rho L^dag = (L (L rho)^dag)^dag
  MatrixXc x, y;
  auto sandwich = [&](const SparseXd& l, double rate) {
    x.noalias() = l * rho;
    y.noalias() = l * x.adjoint();
    drho += rate * y.adjoint();
  };
  if (kappa != 0.0)
    for (const auto& a : a_) sandwich(a, kappa);
  MatrixXd deph;
  for (std::size_t m = 0; m < sm_.size(); ++m) {
    const double g = rates.gamma_of(static_cast<int>(m));
    if (g != 0.0) sandwich(sm_[m], g);
    const double gp = rates.gamma_phi_of(static_cast<int>(m));
    if (gp == 0.0) continue;
    if (deph.size() == 0) deph = MatrixXd::Zero(rho.rows(), rho.cols());
    deph += (0.5 * gp) * (sz_[m] * sz_[m].transpose() - MatrixXd::Ones(rho.rows(), rho.cols()));
  }
  if (deph.size() != 0) drho += rho.cwiseProduct(deph.cast<cplx>());
}

MatrixXc lindblad_rhs(const MatrixXc& rho, const SparseXd& h, const DissipationRates& rates, const SpaceSpec& spec,
                      double t) {
  const BasisTable basis(spec);
  if (rho.rows() != basis.size() || rho.cols() != basis.size() || h.rows() != basis.size())
    throw ShapeError("density matrix or Hamiltonian does not match the space");
  rates.validate(spec);
  MatrixXc out;
  LindbladGenerator(basis).apply(h, rates.kappa(t), rates, rho, out);
  return out;
}

DressedGenerator::DressedGenerator(const BasisTable& basis, const SparseXd& h, const ModelParams& params,
                                   double kappa, const DissipationRates& rates) {
  const auto& spec = basis.spec();
  require_dense(spec);
  const EigenSystem es = eigensystem(basis, h, Sector::full);
  energies_ = es.energies;
  v_ = es.states;
  const Index d = energies_.size();

  gamma_ = MatrixXd::Zero(d, d);
  auto add_channel = [&](const SparseXd& x, double rate_over_freq) {
    const MatrixXc xe = v_.adjoint() * (x * v_);
    for (Index k = 0; k < d; ++k)
      for (Index j = 0; j < d; ++j) {
        const double de = energies_(k) - energies_(j);
        if (de > 1e-12) gamma_(j, k) += rate_over_freq * de * std::norm(xe(k, j));
      }
  };
  if (kappa > 0.0) {
    for (int i = 0; i < spec.n_modes; ++i) {
      const SparseXd a = sparse_annihilator(basis, i);
      add_channel(SparseXd(a + SparseXd(a.transpose())), kappa / params.omega(i));
    }
  }
  for (int m = 0; m < spec.n_qubits; ++m) {
    const double g = rates.gamma_of(m);
    if (g == 0.0) continue;
    const double wq = 2.0 * params.delta(m);
    if (!(wq > 0.0)) throw ConditionError("qubit frequency 2 Delta_m > 0", "dressed qubit rates need a positive splitting");
    add_channel(sparse_pauli(basis, m, Axis::x), g / wq);
  }
  loss_ = gamma_.colwise().sum().transpose();

  for (int m = 0; m < spec.n_qubits; ++m) {
    const double gp = rates.gamma_phi_of(m);
    if (gp == 0.0) continue;
    z_.push_back(v_.adjoint() * (sparse_pauli(basis, m, Axis::z) * v_));
    gphi_.push_back(gp);
  }
}

void DressedGenerator::apply_eigen(const MatrixXc& rho, MatrixXc& drho) const {
  const Index d = energies_.size();
  drho.resize(d, d);
  for (Index b = 0; b < d; ++b)
    for (Index a = 0; a < d; ++a)
      drho(a, b) = cplx(-0.5 * (loss_(a) + loss_(b)), -(energies_(a) - energies_(b))) * rho(a, b);
  const VectorXd pop = rho.diagonal().real();
  drho.diagonal() += (gamma_ * pop).cast<cplx>();
  for (std::size_t m = 0; m < z_.size(); ++m) drho += (0.5 * gphi_[m]) * (z_[m] * rho * z_[m] - rho);
}

MatrixXc dressed_rhs(const MatrixXc& rho, const SparseXd& h, const ModelParams& params,
                     const DissipationRates& rates, const SpaceSpec& spec, double t) {
  const BasisTable basis(spec);
  if (rho.rows() != basis.size() || rho.cols() != basis.size()) throw ShapeError("density matrix does not match the space");
  rates.validate(spec);
  const DressedGenerator gen(basis, h, params, rates.kappa(t), rates);
  MatrixXc de;
  gen.apply_eigen(gen.to_eigenbasis(rho), de);
  return gen.from_eigenbasis(de);
}

Engine parse_engine(const std::string& name) {
  if (name == "lindblad") return Engine::lindblad;
  if (name == "dressed") return Engine::dressed;
  throw ConfigError("unknown engine '" + name + "' (expected lindblad or dressed)");
}

std::string to_string(Engine e) { return e == Engine::lindblad ? "lindblad" : "dressed"; }

OpenTrajectoryResult propagate_master(const DensityMatrix& rho0, const MasterConfig& cfg) {
  const BasisTable basis = build_space(cfg.space);
  if (rho0.dim() != basis.size()) throw ShapeError("initial density matrix does not match the space");
  rho0.validate();
  cfg.rates.validate(cfg.space);
  cfg.schedule.validate(cfg.space);
  if (cfg.engine == Engine::dressed) require_dense(cfg.space);

  const double t_end = cfg.t_end > 0.0 ? cfg.t_end : cfg.schedule.duration();
  const Schedule sched = t_end > cfg.schedule.duration() ? cfg.schedule.then_hold(t_end - cfg.schedule.duration())
                                                         : cfg.schedule;

  std::vector<double> times;
  const int ns = std::max(cfg.samples, 2);
  for (int k = 0; k < ns; ++k) times.push_back(t_end * k / (ns - 1));
  for (double t : cfg.extra_samples)
    if (t >= 0.0 && t <= t_end) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());
  times.back() = t_end;

  std::vector<double> stops = times;
  for (double k : sched.knots()) stops.push_back(k);
  for (double k : cfg.rates.kappa_c.breakpoints()) stops.push_back(k);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::remove_if(stops.begin(), stops.end(), [&](double s) { return s < 0.0 || s > t_end; }), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              stops.end());

  const int nseg = sched.n_segments();
  std::vector<SparseXd> ha(static_cast<std::size_t>(nseg)), hb(static_cast<std::size_t>(nseg));
  for (int s = 0; s < nseg; ++s) {
    const double t0 = sched.knots()[static_cast<std::size_t>(s)];
    ha[static_cast<std::size_t>(s)] = assemble_hamiltonian(basis, sched.at(t0));
    SparseXd b = assemble_hamiltonian(basis, sched.slope(t0));
    b.prune(0.0);
    hb[static_cast<std::size_t>(s)] = std::move(b);
  }

  const LindbladGenerator lind(basis);
  int seg = 0;
  auto lrhs = [&](double t, const MatrixXc& rho, MatrixXc& drho) {
    const auto s = static_cast<std::size_t>(seg);
    const double tau = t - sched.knots()[s];
    if (hb[s].nonZeros() > 0 && tau != 0.0) {
      const SparseXd h = ha[s] + tau * hb[s];
      lind.apply(h, cfg.rates.kappa(t), cfg.rates, rho, drho);
    } else {
      lind.apply(ha[s], cfg.rates.kappa(t), cfg.rates, rho, drho);
    }
  };
  auto lstep = make_integrator<MatrixXc>(lrhs, cfg.integrator);

  std::unique_ptr<DressedGenerator> dressed;
  int dressed_seg = -1;
  double dressed_kappa = -1.0;
  auto drhs = [&](double, const MatrixXc& rho, MatrixXc& drho) { dressed->apply_eigen(rho, drho); };
  auto dstep = make_integrator<MatrixXc>(drhs, cfg.integrator);

  OpenTrajectoryResult res;
  res.times = times;
  const auto nt = static_cast<Index>(times.size());
  const int nm = cfg.space.n_modes;
  res.populations = MatrixXd::Zero(nt, static_cast<Index>(cfg.tracked.size()));
  for (const auto& ts : cfg.tracked) res.population_names.push_back(ts.name);
  if (cfg.target) res.fidelity = VectorXd::Zero(nt);
  res.photon_numbers = MatrixXd::Zero(nt, nm);
  res.emission_rates = MatrixXd::Zero(nt, nm);
  res.integrated_emission = VectorXd::Zero(nm);
  res.min_eigenvalue = std::numeric_limits<double>::infinity();

  std::vector<VectorXd> nmode;
  for (int i = 0; i < nm; ++i) {
    VectorXd n(basis.size());
    for (Index k = 0; k < basis.size(); ++k) n(k) = basis.photons(k, i);
    nmode.push_back(n);
  }
  const bool check_every = basis.size() <= 128;

  MatrixXc rho = rho0.matrix();
  bool in_eigen = false;
  auto bare = [&]() { return in_eigen ? dressed->from_eigenbasis(rho) : rho; };

  auto record = [&](Index k, double t) {
    const DensityMatrix dm(bare());
    const VectorXd diag = dm.matrix().diagonal().real();
    res.max_trace_drift = std::max(res.max_trace_drift, dm.trace_defect());
    res.max_hermiticity_defect = std::max(res.max_hermiticity_defect, dm.hermiticity_defect());
    if (check_every || k % 10 == 0 || k == nt - 1) {
      const double me = dm.min_eigenvalue();
      res.min_eigenvalue = std::min(res.min_eigenvalue, me);
      if (me < -1e-6) res.positivity_flag = true;
      if (me < cfg.positivity_abort) {
        std::ostringstream os;
        os << "density matrix lost positivity at t = " << t << " (min eigenvalue " << me << ")";
        throw ConvergenceError(os.str());
      }
    }
    for (std::size_t s = 0; s < cfg.tracked.size(); ++s)
      res.populations(k, static_cast<Index>(s)) = dm.population(cfg.tracked[s].at(t));
    if (cfg.target) res.fidelity(k) = dm.population(cfg.target->at(t));
    const double kc = cfg.rates.kappa_c.at(t);
    for (int i = 0; i < nm; ++i) {
      res.photon_numbers(k, i) = diag.dot(nmode[static_cast<std::size_t>(i)]);
      res.emission_rates(k, i) = kc * res.photon_numbers(k, i);
    }
    if (k > 0) {
      const double t0 = times[static_cast<std::size_t>(k) - 1];
      const double kmid = cfg.rates.kappa_c.at(0.5 * (t0 + t));
      for (int i = 0; i < nm; ++i)
        res.integrated_emission(i) += kmid * 0.5 * (res.photon_numbers(k - 1, i) + res.photon_numbers(k, i)) * (t - t0);
    }
    if (k == nt - 1) res.final_state = dm;
  };

  double t = 0.0;
  record(0, 0.0);
  Index next_sample = 1;
  for (std::size_t q = 1; q < stops.size(); ++q) {
    const double t1 = stops[q];
    const double tm = 0.5 * (t + t1);
    seg = sched.segment(tm);
    const bool kappa_flat = cfg.rates.kappa_c.at(t) == cfg.rates.kappa_c.at(t1) &&
                            cfg.rates.kappa_c.at(tm) == cfg.rates.kappa_c.at(t1);
    const bool use_dressed = cfg.engine == Engine::dressed && sched.constant_on(seg) && kappa_flat;
    if (use_dressed) {
      const double kap = cfg.rates.kappa(tm);
      if (!dressed || dressed_seg != seg || dressed_kappa != kap) {
        const MatrixXc b = bare();
        dressed = std::make_unique<DressedGenerator>(basis, ha[static_cast<std::size_t>(seg)],
                                                     sched.at(tm), kap, cfg.rates);
        dressed_seg = seg;
        dressed_kappa = kap;
        rho = dressed->to_eigenbasis(b);
        in_eigen = true;
      } else if (!in_eigen) {
        rho = dressed->to_eigenbasis(rho);
        in_eigen = true;
      }
      dstep.advance(rho, t, t1);
    } else {
      if (in_eigen) {
        rho = dressed->from_eigenbasis(rho);
        in_eigen = false;
      }
      lstep.advance(rho, t, t1);
    }
    t = t1;
    while (next_sample < nt && std::abs(times[static_cast<std::size_t>(next_sample)] - t) < 1e-12) {
      record(next_sample, t);
      ++next_sample;
    }
  }
  res.stats = lstep.stats();
  res.stats.accepted += dstep.stats().accepted;
  res.stats.rejected += dstep.stats().rejected;
  res.stats.rhs_evals += dstep.stats().rhs_evals;
  return res;
}

CatchReleaseReport catch_and_release(const CatchReleaseConfig& c) {
  const TrajectoryInfo info = standard_trajectory(c.trajectory, c.overrides);
  const double t_gen = info.schedule.duration();
  const double t_rel = periods_to_time(c.release_periods);
  const double t_end = periods_to_time(c.end_periods);
  if (!(t_gen <= t_rel && t_rel + c.ramp <= t_end))
    throw ConfigError("phase times must satisfy generation <= release < end");

  CatchReleaseReport rep;
  rep.space = info.space;
  rep.space.cutoff = c.cutoff;
  const BasisTable basis = build_space(rep.space);
  const VectorXd g = info.schedule.values().back().g.col(0);
  const VectorXc target = w_target(rep.space, g).amplitudes();

  MasterConfig mc;
  mc.space = rep.space;
  mc.schedule = info.schedule;
  mc.rates.kappa_in = c.kappa_in;
  mc.rates.kappa_c = PiecewiseConstant::step(0.0, t_rel, c.kappa_c);
  mc.rates.kappa_c.ramp = c.ramp;
  mc.rates.gamma = VectorXd::Constant(2, c.gamma);
  mc.rates.gamma_phi = VectorXd::Constant(2, c.gamma_phi);
  mc.t_end = t_end;
  mc.engine = c.engine;
  mc.integrator = c.integrator;
  mc.samples = c.samples;
  mc.extra_samples = {t_gen, t_rel};

  BasisLabel l0;
  l0.spins = {Spin::up, Spin::up};
  l0.photons.assign(static_cast<std::size_t>(rep.space.n_modes), 0);
  const VectorXc psi0 = basis_state(basis, l0).amplitudes();
  mc.tracked = {TrackedState::fixed("vacuum_up_up", psi0), TrackedState::fixed("w_singlet", target)};
  mc.target = TrackedState::fixed("target", target);

  rep.trajectory = propagate_master(DensityMatrix::pure(psi0), mc);
  const auto& tt = rep.trajectory.times;
  auto value_at = [&](double t) {
    const auto it = std::min_element(tt.begin(), tt.end(), [&](double a, double b) {
      return std::abs(a - t) < std::abs(b - t);
    });
    return rep.trajectory.fidelity(static_cast<Index>(it - tt.begin()));
  };
  rep.generation_fidelity = value_at(t_gen);
  rep.release_fidelity = value_at(t_rel);
  rep.hold_fidelity_loss = rep.generation_fidelity - rep.release_fidelity;
  rep.integrated_emission = rep.trajectory.integrated_emission;
  const double total = rep.integrated_emission.sum();
  rep.emission_fractions = total > 0.0 ? VectorXd(rep.integrated_emission / total)
                                       : VectorXd::Zero(rep.integrated_emission.size());
  rep.expected_fractions = w_photons(g).array().square();
  const auto after = std::upper_bound(tt.begin(), tt.end(), t_rel + c.ramp);
  if (after != tt.end()) {
    const VectorXd r = rep.trajectory.emission_rates.row(static_cast<Index>(after - tt.begin())).transpose();
    rep.release_rate_fractions = r.sum() > 0.0 ? VectorXd(r / r.sum()) : VectorXd::Zero(r.size());
  }
  return rep;
}

}  // namespace rabi
