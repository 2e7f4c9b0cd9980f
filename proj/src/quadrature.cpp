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
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "common.hpp"

namespace heatpath::quad {

namespace {

GaussLegendreRule compute_gauss_legendre(int n) {
  // Newton iteration on P_n, symmetric nodes.
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * x * p2 - j * p3) / (j + 1.0);
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// G7,K15 node/weight table (positive half; node 0 first).
constexpr double kr_nodes[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
constexpr double kr_wk[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kr_wg[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};

template <class T>
struct Panel {
  double a, b;
  T value;
  double err;
};

template <class T, class F>
Panel<T> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T f0 = f(c);
  T k15 = f0 * kr_wk[0];
  T g7 = f0 * kr_wg[0];
  for (int i = 1; i < 8; ++i) {
    T s = f(c + h * kr_nodes[i]) + f(c - h * kr_nodes[i]);
    k15 += s * kr_wk[i];
    if (i % 2 == 0) g7 += s * kr_wg[i / 2];
  }
  k15 *= h;
  g7 *= h;
  double diff = std::abs(k15 - g7);
  double err = diff;
  if (diff > 0) {
    // standard QUADPACK-style sharpening of the raw G-K gap
    double scaled = 200.0 * diff;
    err = std::min(diff, scaled * std::sqrt(scaled));
  }
  return {a, b, k15, err};
}

template <class T, class F>
std::pair<T, AdaptiveResult> adaptive_impl(const F& f, double a, double b,
                                           const AdaptiveOptions& opts) {
  auto cmp = [](const Panel<T>& p, const Panel<T>& q) { return p.err < q.err; };
  std::priority_queue<Panel<T>, std::vector<Panel<T>>, decltype(cmp)> heap(cmp);
  AdaptiveResult meta;
  auto first = gk15<T>(f, a, b);
  meta.evaluations = 15;
  heap.push(first);
  T total = first.value;
  double total_err = first.err;
  int panels = 1;
  while (panels < opts.max_panels) {
    double goal = std::max(opts.abs_floor, opts.rel_tol * std::abs(total));
    if (total_err <= goal || !std::isfinite(total_err)) break;
    Panel<T> worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    auto left = gk15<T>(f, worst.a, mid);
    auto right = gk15<T>(f, mid, worst.b);
    meta.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  meta.error = total_err;
  meta.converged = total_err <= std::max(opts.abs_floor, opts.rel_tol * std::abs(total));
  return {total, meta};
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "gauss_legendre: order must be >= 1");
  static std::map<int, GaussLegendreRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  const AdaptiveOptions& opts) {
  auto [value, meta] = adaptive_impl<double>(f, a, b, opts);
  meta.value = value;
  return meta;
}

AdaptiveResultC integrate_adaptive_complex(const std::function<std::complex<double>(double)>& f,
                                           double a, double b, const AdaptiveOptions& opts) {
  auto [value, meta] = adaptive_impl<std::complex<double>>(f, a, b, opts);
  AdaptiveResultC out;
  out.value = value;
  out.error = meta.error;
  out.evaluations = meta.evaluations;
  out.converged = meta.converged;
  return out;
}

}  // namespace heatpath::quad
