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
#include "dirlim.hpp"

#include <cmath>
#include <sstream>

#include "common.hpp"
#include "quadrature.hpp"

namespace heatpath::dirlim {

RefinementSchedule RefinementSchedule::geometric(double start, double factor, int steps) {
  if (steps < 1 || start <= 0 || factor <= 0)
    throw Error(ErrorCode::InvalidArgument, "geometric schedule: need steps>=1, start>0, factor>0");
  RefinementSchedule s;
  s.direction = factor >= 1.0 ? Direction::Increasing : Direction::Decreasing;
  s.indices.resize(steps);
  double v = start;
  for (int i = 0; i < steps; ++i, v *= factor) s.indices[i] = v;
  return s;
}

RefinementSchedule RefinementSchedule::linear(double start, double step, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "linear schedule: need steps>=1");
  RefinementSchedule s;
  s.direction = step >= 0 ? Direction::Increasing : Direction::Decreasing;
  s.indices.resize(steps);
  for (int i = 0; i < steps; ++i) s.indices[i] = start + i * step;
  return s;
}

RefinementSchedule RefinementSchedule::parse(const std::string& spec, int steps) {
  std::stringstream ss(spec);
  std::string kind, a, b;
  if (!std::getline(ss, kind, ':') || !std::getline(ss, a, ':') || !std::getline(ss, b))
    throw ConfigError("schedule spec must be <geometric|linear>:<start>:<factor-or-step>");
  double start = std::stod(a), fb = std::stod(b);
  if (kind == "geometric") return geometric(start, fb, steps);
  if (kind == "linear") return linear(start, fb, steps);
  throw ConfigError("unknown schedule kind '" + kind + "'");
}

namespace {

double value_norm(const ConvergeOptions& opts, const Value& v) {
  return opts.norm ? opts.norm(v) : v.norm();
}

bool is_finite(const Value& v) { return v.allFinite(); }

Divergence detect_oscillation(const std::vector<Value>& values, const ConvergeOptions& opts) {
  // Alternating successive differences of non-vanishing size -> oscillating.
  if (values.size() < 4) return Divergence::None;
  const std::size_t look = std::min<std::size_t>(values.size() - 1, 8);
  int alternations = 0;
  for (std::size_t k = values.size() - look + 1; k + 1 < values.size(); ++k) {
    Value d0 = values[k] - values[k - 1];
    Value d1 = values[k + 1] - values[k];
    double inner = (d1.array().conjugate() * d0.array()).sum().real();
    if (inner < 0) ++alternations;
  }
  const Value& last = values.back();
  double dlast = value_norm(opts, Value(values.back() - values[values.size() - 2]));
  double denom = std::max(value_norm(opts, last), opts.abs_floor);
  if (alternations >= 2 && dlast > opts.tol * denom) return Divergence::Oscillating;
  return Divergence::None;
}

}  // namespace

LimitResult refine_until_converged(const std::function<Value(double)>& evaluator,
                                   const RefinementSchedule& schedule,
                                   const ConvergeOptions& opts) {
  if (schedule.indices.empty())
    throw Error(ErrorCode::InvalidArgument, "refine_until_converged: empty schedule");
  if (!(opts.tol > 0)) throw Error(ErrorCode::InvalidArgument, "refine_until_converged: tol must be > 0");

  LimitResult res;
  int streak = 0;
  for (std::size_t i = 0; i < schedule.indices.size(); ++i) {
    const double idx = schedule.indices[i];
    Value v;
    try {
      v = evaluator(idx);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "evaluator failed at schedule index " << idx << " (position " << i << "): " << e.what();
      throw Error(ErrorCode::Numeric, os.str());
    }
    res.values.push_back(v);

    if (!is_finite(v)) {
      bool pos = true;
      if (v.size() == 1 && v.imag().norm() == 0) pos = !(v(0, 0).real() < 0);
      res.divergence = pos ? Divergence::PositiveInfinity : Divergence::NegativeInfinity;
      res.limit = v;
      return res;
    }
    double nv = value_norm(opts, v);
    if (nv > opts.divergence_threshold) {
      bool neg = v.size() == 1 && v(0, 0).real() < 0;
      res.divergence = neg ? Divergence::NegativeInfinity : Divergence::PositiveInfinity;
      res.limit = v;
      return res;
    }

    if (i > 0) {
      double diff = value_norm(opts, Value(v - res.values[i - 1]));
      double rel = diff / std::max(nv, opts.abs_floor);
      res.error_estimate = rel;
      streak = rel < opts.tol ? streak + 1 : 0;
      if (streak >= opts.stall_window) {
        res.converged = true;
        res.limit = v;
        return res;
      }
    }
  }
  res.limit = res.values.back();
  res.divergence = detect_oscillation(res.values, opts);
  return res;
}

LimitResult window_average_integral(const std::function<double(double)>& f,
                                    const RefinementSchedule& schedule,
                                    const ConvergeOptions& opts) {
  auto evaluator = [&](double T) -> Value {
    if (!(T > 0)) throw DomainError("window_average_integral: T must be > 0");
    quad::AdaptiveOptions q;
    q.rel_tol = 1e-10;
    auto r = quad::integrate_adaptive(f, -T, T, q);
    return scalar(r.value / (2.0 * T));
  };
  return refine_until_converged(evaluator, schedule, opts);
}

LimitResult principal_value(const std::function<double(double)>& f,
                            const RefinementSchedule& schedule, const ConvergeOptions& opts) {
  auto evaluator = [&](double T) -> Value {
    if (!(T > 0 && T < 1)) throw DomainError("principal_value: window T must lie in (0,1)");
    quad::AdaptiveOptions q;
    q.rel_tol = 1e-13;
    auto left = quad::integrate_adaptive(f, -1.0, -T, q);
    auto right = quad::integrate_adaptive(f, T, 1.0, q);
    return scalar(left.value + right.value);
  };
  return refine_until_converged(evaluator, schedule, opts);
}

DeterminantResult gaussian_determinant_integral(const std::function<double(int)>& lambda, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "truncation dimension must be >= 0");
  // Both routes accumulate in log space; the comparison then measures the
  // per-direction quadrature error rather than product rounding drift.
  double log_closed = 0.0, cc = 0.0;  // Kahan
  double log_quad = 0.0, cq = 0.0;
  const auto& rule = quad::gauss_legendre(20);
  for (int j = 1; j <= n; ++j) {
    double lam = lambda(j);
    double mu = 1.0 + lam;
    if (!(mu > 0)) {
      std::ostringstream os;
      os << "gaussian_determinant_integral: 1+lambda_" << j << " = " << mu << " is not positive";
      throw NonPositiveOperatorError(os.str());
    }
    {
      double term = -0.5 * std::log1p(lam) - cc;
      double t = log_closed + term;
      cc = (t - log_closed) - term;
      log_closed = t;
    }
    // pi^{-1/2} int exp(-mu x^2) dx via composite Gauss-Legendre out to the
    // point where the integrand underflows the sum.
    double X = 9.0 / std::sqrt(mu);
    const int panels = 6;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      double a = X * p / panels, b = X * (p + 1) / panels;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x = mid + half * rule.nodes[i];
        acc += half * rule.weights[i] * std::exp(-mu * x * x);
      }
    }
    double integral = 2.0 * acc / std::sqrt(M_PI);
    {
      double term = std::log(integral) - cq;
      double t = log_quad + term;
      cq = (t - log_quad) - term;
      log_quad = t;
    }
  }
  DeterminantResult out;
  out.closed = std::exp(log_closed);
  out.value = std::exp(log_quad);
  out.route_gap = std::abs(std::expm1(log_quad - log_closed));
  return out;
}

std::vector<std::complex<double>> truncated_fourier(
    const std::function<std::complex<double>(double)>& f, double K,
    const std::vector<double>& grid, const FourierOptions& fopts) {
  if (!(K > 0)) throw DomainError("truncated_fourier: K must be > 0");
  std::vector<std::complex<double>> out(grid.size());
  const double norm = 1.0 / std::sqrt(2.0 * M_PI);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    quad::AdaptiveOptions q;
    q.rel_tol = fopts.quad_rel_tol;
    q.max_panels = fopts.max_panels;
    auto g = [&](double y) {
      return f(y) * std::exp(std::complex<double>(0.0, -x * y));
    };
    auto r = quad::integrate_adaptive_complex(g, -K, K, q);
    if (!r.converged) {
      std::ostringstream os;
      os << "truncated_fourier: quadrature did not resolve oscillation x*K=" << std::abs(x) * K
         << " at x=" << x << "; about " << 15LL * (long long)(2 * fopts.max_panels)
         << " nodes would be required";
      throw ResolutionError(os.str());
    }
    out[i] = norm * r.value;
  }
  return out;
}

LimitResult fourier_limit(const std::function<std::complex<double>(double)>& f,
                          const RefinementSchedule& K_schedule, const std::vector<double>& grid,
                          double q, const ConvergeOptions& opts, const FourierOptions& fopts) {
  if (grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "fourier_limit: need >= 2 grid points");
  double h = grid[1] - grid[0];
  ConvergeOptions o = opts;
  o.norm = [q, h](const Value& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += h * std::pow(std::abs(v(i)), q);
    return std::pow(acc, 1.0 / q);
  };
  auto evaluator = [&](double K) -> Value {
    auto samples = truncated_fourier(f, K, grid, fopts);
    Value v(static_cast<Eigen::Index>(samples.size()), 1);
    for (std::size_t i = 0; i < samples.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = samples[i];
    return v;
  };
  return refine_until_converged(evaluator, K_schedule, o);
}

}  // namespace heatpath::dirlim
