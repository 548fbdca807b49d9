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

#include "rabi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace rabi {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<json> as_json(const std::string& value) {
  json j = json::parse(value, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "model.qubits", "model.modes", "model.cutoff",
      "params.delta", "params.omega", "params.g", "params.u",
      "schedule.name", "schedule.periods", "schedule.g_ratios", "schedule.g_norm2", "schedule.g_max",
      "schedule.u", "schedule.delta1_end", "schedule.delta2_end",
      "target.delta", "target.omega", "target.g", "target.u",
      "solver.rtol", "solver.atol", "solver.max_step", "solver.samples", "solver.check_convergence",
      "solver.auto_escalate", "solver.max_cutoff", "solver.convergence_tol",
      "dissipation.kappa_in", "dissipation.kappa_c", "dissipation.release_periods", "dissipation.end_periods",
      "dissipation.ramp", "dissipation.gamma", "dissipation.gamma_phi", "dissipation.engine",
      "dissipation.initial", "dissipation.compare_engines", "dissipation.samples",
      "sweep.coordinate", "sweep.from", "sweep.to", "sweep.points", "sweep.sector", "sweep.flat_energies",
      "sweep.equivalence",
      "dark.family", "dark.tolerance", "dark.nullspace_check", "dark.n_bell", "dark.xi", "dark.variant",
      "dark.occupations", "dark.parity", "dark.energy",
      "diagnostics.enabled", "diagnostics.points", "diagnostics.reference_energy", "diagnostics.min_ratio",
      "mintime.threshold", "mintime.u", "mintime.g_lo", "mintime.g_hi", "mintime.g_step", "mintime.t_lo",
      "mintime.t_hi", "mintime.t_step", "mintime.t_tol",
      "output.prefix", "output.stride",
  };
  return keys;
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile f;
  f.source_ = source;
  const auto& keys = known_config_keys();
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = source + ":" + std::to_string(line) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "key '" + key + "' has no value");
    if (f.find(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    f.entries_.push_back({key, value, line});
  }
  return f;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void ConfigFile::set(const std::string& key, const std::string& value) {
  const auto& keys = known_config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = value;
      e.line = 0;
      return;
    }
  }
  entries_.push_back({key, value, 0});
}

bool ConfigFile::has_section(const std::string& section) const {
  const std::string prefix = section + ".";
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ConfigEntry& e) { return e.key.compare(0, prefix.size(), prefix) == 0; });
}

const ConfigEntry* ConfigFile::find(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
  const ConfigEntry* e = find(key);
  const std::string where = e && e->line > 0 ? source_ + ":" + std::to_string(e->line) : source_;
  throw ConfigError(where + ": key '" + key + "': " + message);
}

std::string ConfigFile::text(const std::string& key, const std::string& fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  const auto j = as_json(e->value);
  if (j && j->is_string()) return j->get<std::string>();
  if (j && !j->is_string()) fail(key, "expected a word");
  return e->value;
}

std::optional<double> ConfigFile::number(const std::string& key) const {
  const ConfigEntry* e = find(key);
  if (!e) return std::nullopt;
  const auto j = as_json(e->value);
  if (!j || !j->is_number()) fail(key, "expected a number, got '" + e->value + "'");
  return j->get<double>();
}

double ConfigFile::number(const std::string& key, double fallback) const { return number(key).value_or(fallback); }

int ConfigFile::integer(const std::string& key, int fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  const auto j = as_json(e->value);
  if (!j || !j->is_number_integer()) fail(key, "expected an integer, got '" + e->value + "'");
  return j->get<int>();
}

bool ConfigFile::flag(const std::string& key, bool fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  const auto j = as_json(e->value);
  if (!j || !j->is_boolean()) fail(key, "expected true or false, got '" + e->value + "'");
  return j->get<bool>();
}

std::optional<VectorXd> ConfigFile::vector(const std::string& key, Index size) const {
  const ConfigEntry* e = find(key);
  if (!e) return std::nullopt;
  const auto j = as_json(e->value);
  if (j && j->is_number()) {
    if (size <= 0) return VectorXd::Constant(1, j->get<double>());
    return VectorXd::Constant(size, j->get<double>());
  }
  if (!j || !j->is_array()) fail(key, "expected a number or a list");
  VectorXd v(static_cast<Index>(j->size()));
  for (std::size_t k = 0; k < j->size(); ++k) {
    if (!(*j)[k].is_number()) fail(key, "list entries must be numbers");
    v(static_cast<Index>(k)) = (*j)[k].get<double>();
  }
  if (size > 0 && v.size() != size) fail(key, "expected " + std::to_string(size) + " entries");
  return v;
}

std::optional<MatrixXd> ConfigFile::matrix(const std::string& key, Index rows, Index cols) const {
  const ConfigEntry* e = find(key);
  if (!e) return std::nullopt;
  const auto j = as_json(e->value);
  if (j && j->is_number()) return MatrixXd::Constant(rows, cols, j->get<double>());
  if (!j || !j->is_array() || static_cast<Index>(j->size()) != rows)
    fail(key, "expected " + std::to_string(rows) + " rows (one per mode)");
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = (*j)[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      fail(key, "row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries (one per qubit)");
    for (Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) fail(key, "matrix entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

namespace {

ModelParams read_params(const ConfigFile& f, const std::string& section, const SpaceSpec& spec,
                        const ModelParams& base) {
  ModelParams p = base;
  const Index n = spec.n_qubits, m = spec.n_modes;
  if (auto v = f.vector(section + ".delta", n)) p.delta = *v;
  if (auto v = f.vector(section + ".omega", m)) p.omega = *v;
  if (auto g = f.matrix(section + ".g", m, n)) p.g = *g;
  if (auto u = f.matrix(section + ".u", m, n)) p.u = *u;
  return p;
}

void positive(const ConfigFile& f, const std::string& key, double v) {
  if (!(v > 0.0)) f.fail(key, "must be positive");
}

void non_negative(const ConfigFile& f, const std::string& key, double v) {
  if (!(v >= 0.0)) f.fail(key, "must be non-negative");
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

RunConfig load_run_config(const ConfigFile& f) {
  RunConfig rc;
  rc.file = f;

  const std::string name = f.text("schedule.name", f.has_section("params") ? "constant" : "fig2_stark");
  const auto standard = standard_trajectory_names();
  const bool is_standard = std::find(standard.begin(), standard.end(), name) != standard.end();
  if (!is_standard && name != "constant" && name != "linear")
    f.fail("schedule.name", "unknown trajectory '" + name + "'");

  if (is_standard) {
    if (f.has_section("params") || f.has_section("target"))
      f.fail("schedule.name", "a standard trajectory fixes its own parameters; remove params.* and target.*");
    if (f.integer("model.qubits", 2) != 2) f.fail("model.qubits", "standard trajectories have two qubits");
    auto& ov = rc.overrides;
    if (auto v = f.number("schedule.periods")) ov.periods = *v;
    if (f.has("model.modes")) ov.modes = f.integer("model.modes", 0);
    if (auto v = f.vector("schedule.g_ratios")) ov.g_ratios = *v;
    if (auto v = f.number("schedule.g_norm2")) ov.g_norm2 = *v;
    if (auto v = f.number("schedule.g_max")) ov.g_max = *v;
    if (auto v = f.number("schedule.u")) ov.u = *v;
    if (auto v = f.number("schedule.delta1_end")) ov.delta1_end = *v;
    if (auto v = f.number("schedule.delta2_end")) ov.delta2_end = *v;
    TrajectoryInfo info;
    try {
      info = standard_trajectory(name, ov);
    } catch (const ConfigError& e) {
      f.fail("schedule.name", e.what());
    }
    rc.trajectory = name;
    rc.space = info.space;
    rc.space.cutoff = f.integer("model.cutoff", info.space.cutoff);
    rc.schedule = info.schedule;
    rc.params = info.schedule.values().back();
    rc.has_schedule = true;
  } else {
    for (const char* k : {"schedule.g_ratios", "schedule.g_norm2", "schedule.g_max", "schedule.u",
                          "schedule.delta1_end", "schedule.delta2_end"})
      if (f.has(k)) f.fail(k, "only applies to standard trajectories");
    rc.space.n_qubits = f.integer("model.qubits", 2);
    rc.space.n_modes = f.integer("model.modes", 1);
    if (rc.space.n_qubits < 1) f.fail("model.qubits", "need at least one qubit");
    if (rc.space.n_modes < 1) f.fail("model.modes", "need at least one mode");
    rc.space.cutoff = f.integer("model.cutoff", default_cutoff(rc.space.n_modes));
    if (!f.has("params.delta")) f.fail("params.delta", "missing; every qubit needs a splitting");
    rc.params = read_params(f, "params", rc.space, ModelParams::zeros(rc.space));
    const double periods = f.number("schedule.periods", 1.0);
    positive(f, "schedule.periods", periods);
    if (name == "linear") {
      if (!f.has_section("target")) f.fail("schedule.name", "a linear schedule needs target.* values");
      const ModelParams end = read_params(f, "target", rc.space, rc.params);
      rc.schedule = Schedule::linear(rc.params, end, periods_to_time(periods));
    } else {
      if (f.has_section("target")) f.fail("schedule.name", "target.* needs schedule.name = linear");
      rc.schedule = Schedule::constant(rc.params, periods_to_time(periods));
    }
    rc.has_schedule = true;
    try {
      rc.schedule.validate(rc.space);
    } catch (const ShapeError& e) {
      f.fail("params.delta", e.what());
    }
  }
  if (rc.space.cutoff < 1) f.fail("model.cutoff", "must be at least 1");

  auto& s = rc.solver;
  s.integrator.rtol = f.number("solver.rtol", s.integrator.rtol);
  s.integrator.atol = f.number("solver.atol", s.integrator.atol);
  positive(f, "solver.rtol", s.integrator.rtol);
  positive(f, "solver.atol", s.integrator.atol);
  if (auto v = f.number("solver.max_step")) {
    positive(f, "solver.max_step", *v);
    s.integrator.h_max = *v;
  }
  s.samples = f.integer("solver.samples", s.samples);
  if (s.samples < 2) f.fail("solver.samples", "need at least two samples");
  s.check_convergence = f.flag("solver.check_convergence", s.check_convergence);
  s.auto_escalate = f.flag("solver.auto_escalate", s.auto_escalate);
  s.max_cutoff = f.integer("solver.max_cutoff", s.max_cutoff);
  s.convergence_tol = f.number("solver.convergence_tol", s.convergence_tol);
  positive(f, "solver.convergence_tol", s.convergence_tol);

  if (f.has_section("dissipation")) {
    DissipationBlock d;
    d.kappa_in = f.number("dissipation.kappa_in", 0.0);
    d.kappa_c = f.number("dissipation.kappa_c", 0.0);
    non_negative(f, "dissipation.kappa_in", d.kappa_in);
    non_negative(f, "dissipation.kappa_c", d.kappa_c);
    d.release_periods = f.number("dissipation.release_periods");
    d.end_periods = f.number("dissipation.end_periods", rc.schedule.duration_periods());
    if (d.end_periods < rc.schedule.duration_periods())
      f.fail("dissipation.end_periods", "ends before the schedule");
    if (d.release_periods && (*d.release_periods < 0.0 || *d.release_periods > d.end_periods))
      f.fail("dissipation.release_periods", "must lie between 0 and end_periods");
    d.ramp = f.number("dissipation.ramp", 0.0);
    non_negative(f, "dissipation.ramp", d.ramp);
    d.gamma = f.vector("dissipation.gamma", rc.space.n_qubits).value_or(VectorXd::Zero(rc.space.n_qubits));
    d.gamma_phi = f.vector("dissipation.gamma_phi", rc.space.n_qubits).value_or(VectorXd::Zero(rc.space.n_qubits));
    if ((d.gamma.array() < 0.0).any()) f.fail("dissipation.gamma", "rates must be non-negative");
    if ((d.gamma_phi.array() < 0.0).any()) f.fail("dissipation.gamma_phi", "rates must be non-negative");
    try {
      d.engine = parse_engine(f.text("dissipation.engine", "lindblad"));
    } catch (const ConfigError& e) {
      f.fail("dissipation.engine", e.what());
    }
    d.initial = f.text("dissipation.initial", "vacuum");
    if (d.initial != "vacuum" && d.initial != "w")
      f.fail("dissipation.initial", "expected vacuum or w");
    d.compare_engines = f.flag("dissipation.compare_engines", false);
    d.samples = f.integer("dissipation.samples", d.samples);
    if (d.samples < 2) f.fail("dissipation.samples", "need at least two samples");
    rc.dissipation = d;
  }

  auto& sw = rc.sweep;
  sw.coordinate = f.text("sweep.coordinate", sw.coordinate);
  if (sw.coordinate != "g" && sw.coordinate != "time") f.fail("sweep.coordinate", "expected g or time");
  sw.from = f.number("sweep.from", 0.0);
  sw.to = f.number("sweep.to", sw.coordinate == "time" ? rc.schedule.duration_periods() : 1.0);
  sw.points = f.integer("sweep.points", sw.points);
  try {
    sw.sector = parse_sector(f.text("sweep.sector", "even"));
  } catch (const ConfigError& e) {
    f.fail("sweep.sector", e.what());
  }
  if (auto v = f.vector("sweep.flat_energies")) sw.flat_energies = to_std(*v);
  sw.equivalence = f.flag("sweep.equivalence", false);

  auto& dk = rc.dark;
  dk.family = f.text("dark.family", "");
  dk.tolerance = f.number("dark.tolerance", dk.tolerance);
  positive(f, "dark.tolerance", dk.tolerance);
  dk.nullspace_check = f.flag("dark.nullspace_check", false);
  dk.n_bell = f.integer("dark.n_bell", dk.n_bell);
  dk.xi = f.number("dark.xi", 0.0);
  non_negative(f, "dark.xi", dk.xi);
  dk.variant = f.text("dark.variant", "a");
  if (dk.variant != "a" && dk.variant != "b") f.fail("dark.variant", "expected a or b");
  if (auto v = f.vector("dark.occupations")) {
    for (double x : *v) {
      if (x != std::floor(x)) f.fail("dark.occupations", "occupations are integers");
      dk.occupations.push_back(static_cast<int>(x));
    }
  }
  dk.parity = f.integer("dark.parity", 1);
  if (dk.parity != 1 && dk.parity != -1) f.fail("dark.parity", "expected 1 or -1");
  dk.energy = f.number("dark.energy");

  auto& dg = rc.diagnostics;
  dg.enabled = f.flag("diagnostics.enabled", dg.enabled);
  dg.points = f.integer("diagnostics.points", dg.points);
  if (dg.points < 2) f.fail("diagnostics.points", "need at least two points");
  dg.reference_energy = f.number("diagnostics.reference_energy", dg.reference_energy);
  dg.min_ratio = f.number("diagnostics.min_ratio", dg.min_ratio);

  auto& mt = rc.min_time.search;
  mt.threshold = f.number("mintime.threshold", mt.threshold);
  if (!(mt.threshold > 0.0 && mt.threshold < 1.0)) f.fail("mintime.threshold", "must lie in (0, 1)");
  if (auto v = f.vector("mintime.u")) rc.min_time.u_grid = to_std(*v);
  mt.g_lo = f.number("mintime.g_lo", mt.g_lo);
  mt.g_hi = f.number("mintime.g_hi", mt.g_hi);
  mt.g_step = f.number("mintime.g_step", mt.g_step);
  mt.t_lo = f.number("mintime.t_lo", mt.t_lo);
  mt.t_hi = f.number("mintime.t_hi", mt.t_hi);
  mt.t_step = f.number("mintime.t_step", mt.t_step);
  mt.t_tol = f.number("mintime.t_tol", mt.t_tol);
  positive(f, "mintime.g_step", mt.g_step);
  positive(f, "mintime.t_step", mt.t_step);
  positive(f, "mintime.t_tol", mt.t_tol);
  mt.cutoff = rc.space.cutoff;
  mt.integrator = s.integrator;

  rc.output.prefix = f.text("output.prefix", rc.output.prefix);
  if (rc.output.prefix.empty() || rc.output.prefix.find('/') != std::string::npos)
    f.fail("output.prefix", "must be a plain file name prefix");
  rc.output.stride = f.integer("output.stride", 1);
  if (rc.output.stride < 1) f.fail("output.stride", "must be at least 1");
  return rc;
}

}  // namespace rabi
