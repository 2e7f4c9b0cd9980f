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

#include <complex>
#include <functional>
#include <vector>

namespace heatpath::quad {

// Gauss-Legendre rule on [-1, 1]; nodes/weights are cached per order.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
auto gauss_legendre_integrate(const F& f, double a, double b, int n) {
  const auto& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto acc = f(mid + half * rule.nodes[0]) * (half * rule.weights[0]);
  for (int i = 1; i < n; ++i) acc += f(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
  return acc;
}

struct AdaptiveOptions {
  double rel_tol = 1e-12;
  double abs_floor = 1e-14;  // stop refining once panel errors drop below this
  int max_panels = 200000;
};

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) panel bisection.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  const AdaptiveOptions& opts = {});

struct AdaptiveResultC {
  std::complex<double> value{0.0, 0.0};
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

AdaptiveResultC integrate_adaptive_complex(const std::function<std::complex<double>(double)>& f,
                                           double a, double b, const AdaptiveOptions& opts = {});

}  // namespace heatpath::quad
