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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "rabi/types.hpp"

namespace rabi {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  ///< 0 picks a start step from the derivative norm
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-13;
  /// When positive, every step has this size (clipped at stop times) and no error control is applied.
  double fixed_step = 0.0;
  long max_steps = 100'000'000;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Dormand-Prince 5(4) with a max-norm error estimate per unit time.
/// `Rhs` is callable as rhs(t, y, dydt) with y, dydt of type `State`
/// (any dense Eigen vector or matrix).
template <typename State, typename Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, IntegratorConfig config) : rhs_(std::move(rhs)), cfg_(config) {}

  const IntegrationStats& stats() const { return stats_; }

  /// Integrates y from t to t_end; t is updated to exactly t_end.
  void advance(State& y, double& t, double t_end) {
    if (t_end <= t) return;
    if (cfg_.fixed_step > 0.0) {
      while (t < t_end) {
        const double h = std::min(cfg_.fixed_step, t_end - t);
        eval(t, y, k_[0]);
        stage(y, t, h);
        y = y5_;
        t = (t_end - (t + h) < 1e-14 * std::max(1.0, std::abs(t_end))) ? t_end : t + h;
        ++stats_.accepted;
      }
      return;
    }
    eval(t, y, k_[0]);
    if (h_ <= 0.0) h_ = initial_step(y, t_end - t);
    while (t < t_end) {
      if (stats_.accepted + stats_.rejected > cfg_.max_steps) throw ConvergenceError("integrator step budget exhausted");
      const bool last = t + h_ >= t_end;
      const double h = last ? t_end - t : h_;
      stage(y, t, h);
      const double err = error_norm(y, h);
      if (err <= 1.0) {
        y.swap(y5_);
        t = last ? t_end : t + h;
        ++stats_.accepted;
        k_[0].swap(k_[6]);
        if (!last) h_ = h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.25), 0.2, 5.0);
      } else {
        ++stats_.rejected;
        const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9) : 0.1;
        h_ = h * fac;
        if (h_ < cfg_.h_min) throw ConvergenceError("integrator step size underflow");
      }
      h_ = std::min(h_, cfg_.h_max);
    }
  }

 private:
  void eval(double t, const State& y, State& dy) {
    rhs_(t, y, dy);
    ++stats_.rhs_evals;
  }

  double initial_step(const State& y, double span) const {
    if (cfg_.h_init > 0.0) return std::min(cfg_.h_init, cfg_.h_max);
    const double d = max_abs(k_[0]);
    const double s = std::max(max_abs(y), 1e-12);
    double h = d > 0.0 ? 0.01 * s / d : span;
    return std::min({h, span, cfg_.h_max});
  }

  // Fills y5_ (5th-order solution) and k_[1..6]; k_[0] must hold f(t, y).
  void stage(const State& y, double t, double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    tmp_ = y + h * a21 * k_[0];
    eval(t + c2 * h, tmp_, k_[1]);
    tmp_ = y + h * (a31 * k_[0] + a32 * k_[1]);
    eval(t + c3 * h, tmp_, k_[2]);
    tmp_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    eval(t + c4 * h, tmp_, k_[3]);
    tmp_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    eval(t + c5 * h, tmp_, k_[4]);
    tmp_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    eval(t + h, tmp_, k_[5]);
    y5_ = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    if (cfg_.fixed_step > 0.0) return;
    eval(t + h, y5_, k_[6]);
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
  }

  // Tolerance grows with h, floored at the roundoff level of y.
  double error_norm(const State& y, double h) const {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * max_abs(y);
    const auto scale =
        (h * (cfg_.atol + cfg_.rtol * y.cwiseAbs().cwiseMax(y5_.cwiseAbs()).array()) + floor).eval();
    const double e = (err_.cwiseAbs().array() / scale).maxCoeff();
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  }

  Rhs rhs_;
  IntegratorConfig cfg_;
  IntegrationStats stats_;
  double h_ = 0.0;
  State k_[7];
  State tmp_, y5_, err_;
};

template <typename State, typename Rhs>
DormandPrince<State, Rhs> make_integrator(Rhs rhs, const IntegratorConfig& config) {
  return DormandPrince<State, Rhs>(std::move(rhs), config);
}

}  // namespace rabi
