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

#include "rabi/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace rabi {

namespace {

ModelParams combine(const ModelParams& a, double sa, const ModelParams& b, double sb) {
  ModelParams r;
  r.delta = sa * a.delta + sb * b.delta;
  r.omega = sa * a.omega + sb * b.omega;
  r.g = sa * a.g + sb * b.g;
  r.u = sa * a.u + sb * b.u;
  return r;
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
  return a.delta.size() == b.delta.size() && a.omega.size() == b.omega.size() && a.g.rows() == b.g.rows() &&
         a.g.cols() == b.g.cols() && a.u.rows() == b.u.rows() && a.u.cols() == b.u.cols();
}

}  // namespace

Schedule::Schedule(std::vector<double> knots, std::vector<ModelParams> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size())
    throw ShapeError("a schedule needs matching knots and values, at least two");
  if (knots_.front() != 0.0) throw ShapeError("schedule must start at t = 0");
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) throw ShapeError("schedule knots must increase strictly");
    if (!same_shape(values_[k], values_[0])) throw ShapeError("schedule values change shape");
  }
}

Schedule Schedule::constant(const ModelParams& p, double duration) { return Schedule({0.0, duration}, {p, p}); }

Schedule Schedule::linear(const ModelParams& from, const ModelParams& to, double duration) {
  return Schedule({0.0, duration}, {from, to});
}

Schedule Schedule::then_hold(double extra) const {
  if (extra <= 0.0) return *this;
  auto k = knots_;
  auto v = values_;
  k.push_back(duration() + extra);
  v.push_back(values_.back());
  return Schedule(std::move(k), std::move(v));
}

int Schedule::segment(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto k = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(k, 0, n_segments() - 1);
}

ModelParams Schedule::at(double t) const {
  if (t >= duration()) return values_.back();
  if (t <= 0.0) return values_.front();
  const int k = segment(t);
  const auto s = static_cast<std::size_t>(k);
  const double w = (t - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return combine(values_[s], 1.0 - w, values_[s + 1], w);
}

ModelParams Schedule::slope(double t) const {
  if (t > duration()) return combine(values_[0], 0.0, values_[0], 0.0);
  const auto s = static_cast<std::size_t>(segment(t));
  const double inv = 1.0 / (knots_[s + 1] - knots_[s]);
  return combine(values_[s + 1], inv, values_[s], -inv);
}

bool Schedule::constant_on(int seg) const {
  const auto s = static_cast<std::size_t>(seg);
  const ModelParams& a = values_[s];
  const ModelParams& b = values_[s + 1];
  return a.delta == b.delta && a.omega == b.omega && a.g == b.g && a.u == b.u;
}

void Schedule::validate(const SpaceSpec& spec) const {
  for (const auto& v : values_) v.validate(spec);
}

namespace {

struct Base {
  double periods;
  int modes;
  double g_norm2;
  VectorXd ratios;  // empty: uniform
  double u1, u2;    // Stark shift on qubit 0 and 1, same for every mode
  double delta1_end;
};

Base base_of(const std::string& name) {
  if (name == "fig1_rabi") return {11.0, 2, 2 * 0.3 * 0.3, {}, 0.0, 0.0, 0.5};
  if (name == "fig2_stark" || name == "figS2c") return {1.86, 2, 2 * 0.7 * 0.7, {}, 0.5, 0.5, 0.5};
  if (name == "fig3_stark_asym") return {1.55, 2, 2 * 0.93 * 0.93, {}, 2.0 / 3.0, 1.0 / 3.0, 0.36};
  if (name == "figS2a") return {3.18, 2, 0.65, {}, 0.5, 0.5, 0.5};
  if (name == "figS2e") return {1.55, 3, 2 * 0.93 * 0.93, {}, 2.0 / 3.0, 1.0 / 3.0, 0.36};
  if (name == "figS2g") {
    VectorXd r(2);
    r << 2.0, 1.0;
    return {1.86, 2, 0.98, r, 0.5, 0.5, 0.5};
  }
  throw ConfigError("unknown trajectory '" + name + "'");
}

}  // namespace

std::vector<std::string> standard_trajectory_names() {
  return {"fig1_rabi", "fig2_stark", "fig3_stark_asym", "figS2a", "figS2c", "figS2e", "figS2g"};
}

int default_cutoff(int modes) {
  if (modes <= 2) return 6;
  if (modes == 3) return 4;
  return 2;
}

TrajectoryInfo standard_trajectory(const std::string& name, const TrajectoryOverrides& ov) {
  Base b = base_of(name);
  if (ov.periods) {
    if (!(*ov.periods > 0.0)) throw ConfigError("trajectory duration must be positive");
    b.periods = *ov.periods;
  }
  if (ov.modes) {
    if (*ov.modes < 1) throw ConfigError("trajectory needs at least one mode");
    if (*ov.modes != b.modes) b.ratios.resize(0);
    b.modes = *ov.modes;
  }
  if (ov.g_ratios) {
    if (ov.g_ratios->size() != b.modes) throw ConfigError("g ratio list length differs from the mode count");
    if (ov.g_ratios->norm() == 0.0 || (ov.g_ratios->array() < 0.0).any())
      throw ConfigError("g ratios must be non-negative and not all zero");
    b.ratios = *ov.g_ratios;
  }
  if (ov.g_max) {
    if (ov.g_norm2) throw ConfigError("g_max and g_norm2 are mutually exclusive");
    b.g_norm2 = b.modes * *ov.g_max * *ov.g_max;
    b.ratios.resize(0);
  }
  if (ov.g_norm2) {
    if (!(*ov.g_norm2 > 0.0)) throw ConfigError("g_norm2 must be positive");
    b.g_norm2 = *ov.g_norm2;
  }
  if (ov.u) b.u1 = b.u2 = *ov.u;

  double d1 = b.delta1_end;
  double d2 = 1.0 - d1;
  if (ov.delta1_end || ov.delta2_end) {
    d1 = ov.delta1_end.value_or(1.0 - ov.delta2_end.value_or(d2));
    d2 = ov.delta2_end.value_or(1.0 - d1);
    if (std::abs(d1 + d2 - 1.0) > 1e-12)
      throw ConditionError("Delta_1 + Delta_2 = omega", "trajectory end values sum to " + std::to_string(d1 + d2));
  }

  const int m = b.modes;
  const VectorXd r = b.ratios.size() == m ? b.ratios : VectorXd::Ones(m);
  const VectorXd g = std::sqrt(b.g_norm2) * r / r.norm();

  ModelParams start;
  start.delta = VectorXd(2);
  start.delta << 1.0, 0.0;
  start.omega = VectorXd::Ones(m);
  start.g = MatrixXd::Zero(m, 2);
  start.u = MatrixXd(m, 2);
  start.u.col(0).setConstant(b.u1);
  start.u.col(1).setConstant(b.u2);
  ModelParams end = start;
  end.delta << d1, d2;
  end.g.col(0) = g;
  end.g.col(1) = g;

  TrajectoryInfo info;
  info.name = name;
  info.space = SpaceSpec{2, m, default_cutoff(m)};
  info.schedule = Schedule::linear(start, end, periods_to_time(b.periods));
  return info;
}

}  // namespace rabi
