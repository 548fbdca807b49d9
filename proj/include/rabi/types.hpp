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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rabi {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<cplx>;
using VectorXc = Vector<cplx>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Row-major storage keeps sparse matrix-vector products cache friendly.
using SparseXd = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseXc = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Thrown when a requested Hilbert space exceeds the configured size limit.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when model parameters violate the conditions a construction needs.
class ConditionError : public std::runtime_error {
 public:
  ConditionError(std::string constraint, const std::string& detail)
      : std::runtime_error("condition violated: " + constraint + " (" + detail + ")"),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Thrown when a configuration is unsatisfiable because of a zero divisor.
class SingularError : public ConditionError {
 public:
  using ConditionError::ConditionError;
};

/// Thrown on integrator failure or an unconverged truncation.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on inconsistent shapes or out-of-range indices.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename A, typename B>
auto commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a * b - b * a).eval();
}

/// Converts a duration in periods 2 pi / omega into natural time units 1 / omega.
constexpr double kTwoPi = 6.283185307179586476925286766559;
inline double periods_to_time(double periods) { return periods * kTwoPi; }
inline double time_to_periods(double t) { return t / kTwoPi; }

}  // namespace rabi
