/*
 * Copyright 2026 The heatpath authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace heatpath::dirlim {

// Integral values along a refinement chain. Scalars travel as 1x1 matrices,
// sampled functions as column vectors.
using Value = Eigen::MatrixXcd;

inline Value scalar(double v) {
  Value m(1, 1);
  m(0, 0) = v;
  return m;
}
inline Value scalar(std::complex<double> v) {
  Value m(1, 1);
  m(0, 0) = v;
  return m;
}

// A cofinal chain through a directed system. Entries are the indices the
// evaluator is called at (window radius T, truncation dimension n, ...),
// ordered so that each entry dominates its predecessor.
struct RefinementSchedule {
  enum class Direction { Increasing, Decreasing };
  std::vector<double> indices;
  Direction direction = Direction::Increasing;

  static RefinementSchedule geometric(double start, double factor, int steps);
  static RefinementSchedule linear(double start, double step, int steps);
  // "geometric:<start>:<factor>" or "linear:<start>:<step>"
  static RefinementSchedule parse(const std::string& spec, int steps);
};

enum class Divergence { None, PositiveInfinity, NegativeInfinity, Oscillating };

struct LimitResult {
  std::vector<Value> values;
  bool converged = false;
  Value limit;
  double error_estimate = 0.0;
  Divergence divergence = Divergence::None;
};

struct ConvergeOptions {
  double tol = 1e-8;
  int stall_window = 3;               // consecutive small successive differences required
  double divergence_threshold = 1e12; // magnitude that flags +-infinity
  double abs_floor = 1.0;             // denominator floor for relative differences
  std::function<double(const Value&)> norm;  // defaults to Frobenius
};

// Declares convergence after `stall_window` consecutive successive relative
// differences below tol. This is an estimate of net convergence, never a
// proof; divergence flags fire on unbounded growth or alternation.
LimitResult refine_until_converged(const std::function<Value(double)>& evaluator,
                                   const RefinementSchedule& schedule,
                                   const ConvergeOptions& opts);

// (1/2T) * integral of f over [-T, T] along the schedule of T values.
LimitResult window_average_integral(const std::function<double(double)>& f,
                                    const RefinementSchedule& schedule,
                                    const ConvergeOptions& opts);

// integral over [-1,-T] + [T,1] along a schedule of T decreasing to 0.
LimitResult principal_value(const std::function<double(double)>& f,
                            const RefinementSchedule& schedule, const ConvergeOptions& opts);

struct DeterminantResult {
  double value = 0.0;        // the quadrature route (route b)
  double closed = 0.0;       // the closed product (route a)
  double route_gap = 0.0;    // |b/a - 1|
};

// prod_{j<=n} (1+lambda_j)^{-1/2}, computed both as the closed product and as
// one Gaussian quadrature per eigendirection. Throws NonPositiveOperatorError
// if any 1+lambda_j <= 0.
DeterminantResult gaussian_determinant_integral(const std::function<double(int)>& lambda, int n);

struct FourierOptions {
  double quad_rel_tol = 1e-10;
  int max_panels = 400000;
};

// (2pi)^{-1/2} int_{-K}^{K} e^{-i x y} f(y) dy sampled on `grid`.
std::vector<std::complex<double>> truncated_fourier(
    const std::function<std::complex<double>(double)>& f, double K,
    const std::vector<double>& grid, const FourierOptions& fopts = {});

// Feeds truncated_fourier values at growing K into refine_until_converged
// under the discretized L^q grid norm.
LimitResult fourier_limit(const std::function<std::complex<double>(double)>& f,
                          const RefinementSchedule& K_schedule, const std::vector<double>& grid,
                          double q, const ConvergeOptions& opts, const FourierOptions& fopts = {});

}  // namespace heatpath::dirlim
