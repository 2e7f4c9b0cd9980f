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
#include "accept.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "common.hpp"
#include "dirlim.hpp"
#include "pathint.hpp"

namespace heatpath::accept {

namespace {

using geom::Manifold;
using geom::Point;
using kernels::CutoffProfile;
using pathint::LimitConfig;
using pathint::Partition;
using report::json;

double spec_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  return m.jacobiSvd().singularValues()(0);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------- A1: S1 flat, zero potential ----------
CriterionResult run_a1(int threads) {
  CriterionResult res;
  Manifold M = Manifold::circle(1.0);
  CutoffProfile prof{1.0};
  auto B = bundles::BundleModel::line(M);
  auto k4 = kernels::k_modified(4, B, M, prof);

  // oracle self-check: Fourier sum against the periodized Gaussian
  double xcheck = 0.0;
  for (double t : {0.05, 0.1, 0.5}) {
    for (double arc : {0.0, 0.7, 2.0}) {
      double a = kernels::spectral_heat_kernel(M, 0.0, t, Point(0.0), Point(arc));
      double b = kernels::periodized_gauss_circle(1.0, t, arc);
      xcheck = std::max(xcheck, std::abs(a - b));
    }
  }

  LimitConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 6;
  cfg.grid_N0 = 64;
  cfg.tol = 3e-3;
  cfg.stall_window = 2;
  cfg.threads = threads;
  auto oracle = [&](double t, const Point& a, const Point& b) {
    return dirlim::scalar(kernels::spectral_heat_kernel(M, 0.0, t, a, b));
  };
  auto rep = pathint::path_integral_limit(k4, M, 0.5, Point(0.0), Point(1.0), cfg, oracle);
  double terminal = rep.rows.back().oracle_error;

  res.pass = rep.converged && terminal <= 1e-3 && xcheck <= 1e-12;
  res.headline = "terminal rel err " + fmt(terminal) + " (<=1e-3), oracle xcheck " + fmt(xcheck);
  res.detail = report::to_json(rep);
  res.detail["oracle_cross_check"] = xcheck;
  return res;
}

// ---------- A2: sphere, Gaussian-with-cutoff source ----------
CriterionResult run_a2(int threads) {
  CriterionResult res;
  Manifold M = Manifold::sphere(1.0);
  CutoffProfile prof{0.75};
  auto q = kernels::gauss_chi_kernel(M, prof);

  LimitConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 5;
  cfg.grid_N0 = 8;
  cfg.tol = 5e-3;
  cfg.stall_window = 2;
  cfg.threads = threads;
  const double shift = 2.0 / 3.0;  // scal/3 on the unit sphere
  auto oracle = [&](double t, const Point& a, const Point& b) {
    return dirlim::scalar(kernels::spectral_heat_kernel(M, shift, t, a, b));
  };
  auto rep =
      pathint::path_integral_limit(q, M, 0.3, Point(0.0, 0.0), Point(1.0, 0.0), cfg, oracle);
  double terminal = rep.rows.back().oracle_error;
  res.pass = rep.converged && terminal <= 1e-2;
  res.headline = "terminal rel err vs e^{-2t/3} k_Delta: " + fmt(terminal) + " (<=1e-2)";
  res.detail = report::to_json(rep);
  return res;
}

// ---------- A3: scalar potential corollary ----------
CriterionResult run_a3(int threads) {
  CriterionResult res;
  Manifold M = Manifold::circle(1.0);
  CutoffProfile prof{1.0};
  auto B = bundles::BundleModel::line(M, "cos");
  auto k4 = kernels::k_modified(4, B, M, prof);
  kernels::GalerkinOracle gal(M, B);

  LimitConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 6;
  cfg.grid_N0 = 64;
  cfg.tol = 3e-3;
  cfg.stall_window = 2;
  cfg.threads = threads;
  auto oracle = [&](double t, const Point& a, const Point& b) { return gal.kernel(t, a, b); };
  auto rep = pathint::path_integral_limit(k4, M, 0.4, Point(0.0), Point(1.0), cfg, oracle);
  double terminal = rep.rows.back().oracle_error;
  res.pass = rep.converged && terminal <= 1e-3;
  res.headline = "terminal rel err vs Galerkin: " + fmt(terminal) + " (<=1e-3), modes " +
                 std::to_string(gal.modes());
  res.detail = report::to_json(rep);
  return res;
}

// ---------- A4: noncommuting rank-2 bundle ----------
CriterionResult run_a4(int threads) {
  CriterionResult res;
  Manifold M = Manifold::circle(1.0);
  CutoffProfile prof{1.0};
  auto B = bundles::BundleModel::rank2(M, "skew@0.5", "cosdiag@1,0.3");
  auto k4 = kernels::k_modified(4, B, M, prof);
  kernels::GalerkinOracle gal(M, B);
  const double t = 0.3;
  const Point x(0.0), y(1.0);

  LimitConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 5;
  cfg.grid_N0 = 48;
  cfg.tol = 4e-3;
  cfg.stall_window = 2;
  cfg.threads = threads;
  auto oracle = [&](double tt, const Point& a, const Point& b) { return gal.kernel(tt, a, b); };
  auto rep = pathint::path_integral_limit(k4, M, t, x, y, cfg, oracle);
  double terminal = rep.rows.back().oracle_error;

  // ordered vs unordered exponential must differ at r = 2
  Partition P2 = Partition::uniform(2);
  auto grid = M.quadrature_grid(256);
  Eigen::MatrixXcd vo = Eigen::MatrixXcd::Zero(2, 2), vu = Eigen::MatrixXcd::Zero(2, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto poly = pathint::GeodesicPolygon::try_make(M, P2, {x, grid.nodes[i], y});
    if (poly.rejected) continue;
    vo += grid.weights[i] * pathint::theorem_integrand(B, M, prof, t, poly, true);
    vu += grid.weights[i] * pathint::theorem_integrand(B, M, prof, t, poly, false);
  }
  double Z = pathint::renorm_constant(P2, 1, t);
  vo /= Z;
  vu /= Z;
  double order_gap = spec_norm(vo - vu) / spec_norm(vo);

  res.pass = rep.converged && terminal <= 1e-2 && order_gap >= 1e-3;
  res.headline = "terminal rel err " + fmt(terminal) + " (<=1e-2), ordered-vs-unordered gap " +
                 fmt(order_gap) + " (>=1e-3)";
  res.detail = report::to_json(rep);
  res.detail["order_gap_r2"] = order_gap;
  res.detail["galerkin_modes"] = gal.modes();
  return res;
}

// ---------- A5: k3/k4 chain difference mesh scaling ----------
CriterionResult run_a5(int threads) {
  CriterionResult res;
  Manifold M = Manifold::sphere(1.0);
  CutoffProfile prof{0.75};
  auto B = bundles::BundleModel::line(M);
  auto k3 = kernels::k_modified(3, B, M, prof);
  auto k4 = kernels::k_modified(4, B, M, prof);
  const double t = 0.25;
  const Point x(0.0, 0.0), y(1.0, 0.0);

  std::vector<double> meshes, diffs;
  double d3 = 0, d4 = 0, prev3 = 0, prev4 = 0, last_gap = 0;
  for (int k = 1; k <= 5; ++k) {
    int r = 1 << k;
    int N = 8 << (k - 1);
    auto grid = M.quadrature_grid(N);
    Partition P = Partition::uniform(r);
    double v3 = pathint::kernel_chain(k3, P, t, x, y, grid, threads)(0, 0).real();
    double v4 = pathint::kernel_chain(k4, P, t, x, y, grid, threads)(0, 0).real();
    meshes.push_back(1.0 / r);
    diffs.push_back(std::abs(v3 - v4));
    if (k > 1) {
      d3 = std::abs(v3 - prev3);
      d4 = std::abs(v4 - prev4);
    }
    prev3 = v3;
    prev4 = v4;
    last_gap = std::abs(v3 - v4);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    double lx = std::log(meshes[i]), ly = std::log(std::max(diffs[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(meshes.size());
  double exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bool agree = last_gap <= d3 + d4;

  res.pass = exponent >= 1.5 - 0.3 && agree;
  res.headline = "mesh exponent " + fmt(exponent) + " (>=1.2), terminal gap " + fmt(last_gap) +
                 " vs combined estimate " + fmt(d3 + d4);
  res.detail["meshes"] = meshes;
  res.detail["diffs"] = diffs;
  res.detail["exponent"] = exponent;
  res.detail["terminal_gap"] = last_gap;
  res.detail["combined_successive"] = d3 + d4;
  return res;
}

// ---------- A6: heat-related regressions ----------
CriterionResult run_a6(int) {
  CriterionResult res;
  std::vector<double> B_list{1.0, 2.0};

  Manifold s1 = Manifold::circle(1.0);
  CutoffProfile p1{1.0};
  auto Bc = bundles::BundleModel::line(s1, "cos");
  auto k1 = kernels::k_modified(1, Bc, s1, p1);
  auto k2 = kernels::k_modified(2, Bc, s1, p1);
  std::vector<double> tg1;
  for (int j = 0; j < 6; ++j) tg1.push_back(0.0125 * (1 << j));
  auto pairs1 = kernels::make_pair_grid(s1, 20, 2.0 * p1.eta * 0.99);
  auto rep12 = kernels::heat_related_check(k1, k2, s1, tg1, pairs1, B_list);

  Manifold s2 = Manifold::sphere(1.0);
  CutoffProfile p2{0.75};
  auto B0 = bundles::BundleModel::line(s2);
  auto k3 = kernels::k_modified(3, B0, s2, p2);
  auto k4 = kernels::k_modified(4, B0, s2, p2);
  std::vector<double> tg2;
  for (int j = 0; j < 6; ++j) tg2.push_back(0.0125 * (1 << j));
  auto pairs2 = kernels::make_pair_grid(s2, 24, 2.0 * p2.eta * 0.97);
  auto rep34 = kernels::heat_related_check(k3, k4, s2, tg2, pairs2, B_list);

  bool c1 = rep12.beta >= 1.8;
  bool c2 = rep34.lemma_combined >= 1.3;
  res.pass = c1 && c2;
  res.headline = "k1/k2 beta " + fmt(rep12.beta) + " (>=1.8); k3/k4 beta+alpha/2 " +
                 fmt(rep34.lemma_combined) + " (>=1.3)";
  res.detail["k1k2"] = report::to_json(rep12);
  res.detail["k3k4"] = report::to_json(rep34);
  return res;
}

// ---------- A7: the lower heat-kernel bound ----------
CriterionResult run_a7(int) {
  CriterionResult res;
  std::vector<double> tg;
  for (int i = 1; i <= 20; ++i) tg.push_back(0.05 * i);
  json detail;
  bool pass = true;
  std::string head;
  for (const auto& spec : {"s1:1", "t2:1,1", "s2:1"}) {
    Manifold M = Manifold::parse(spec);
    auto rep = kernels::hsu_check(M, tg, 1000, 1);
    pass = pass && rep.positive && rep.stability <= 0.10;
    detail[spec] = report::to_json(rep);
    head += std::string(spec) + ": " + fmt(rep.min_ratio) + "  ";
  }
  res.pass = pass;
  res.headline = "min k_Delta/e per manifold: " + head;
  res.detail = detail;
  return res;
}

// ---------- A8: the renormalized-integral suite ----------
CriterionResult run_a8(int) {
  CriterionResult res;
  json detail;
  bool pass = true;

  dirlim::ConvergeOptions copt;
  copt.tol = 3e-4;
  copt.stall_window = 3;
  auto sched_up = dirlim::RefinementSchedule::geometric(1.0, 4.0, 26);

  // window averages: the alpha case split
  auto wa = [&](double alpha) {
    return dirlim::window_average_integral(
        [alpha](double x) { return std::pow(std::abs(x) + 1.0, alpha); }, sched_up, copt);
  };
  auto neg = wa(-0.5);
  auto zero = wa(0.0);
  auto pos = wa(1.0);
  bool case_split = neg.converged && std::abs(neg.limit(0, 0).real()) <= 1e-3 &&
                    zero.converged && std::abs(zero.limit(0, 0).real() - 1.0) <= 1e-10 &&
                    pos.divergence == dirlim::Divergence::PositiveInfinity;
  detail["window_average"] = {{"alpha_neg", report::to_json(neg)},
                              {"alpha_zero", report::to_json(zero)},
                              {"alpha_pos", report::to_json(pos)}};
  pass = pass && case_split;

  // principal value of 1/x
  dirlim::ConvergeOptions pvopt;
  pvopt.tol = 1e-8;
  pvopt.stall_window = 3;
  auto pv = dirlim::principal_value([](double x) { return 1.0 / x; },
                                    dirlim::RefinementSchedule::geometric(0.5, 0.5, 22), pvopt);
  bool pv_ok = pv.converged && std::abs(pv.limit(0, 0).real()) <= 1e-10;
  detail["principal_value"] = report::to_json(pv);
  pass = pass && pv_ok;

  // determinant at n = 1e4 against the closed-form product oracle.
  // The independently computed partial product at n = 10^4 is
  // 0.5215901244152737; the infinite product (sinh pi / pi)^{-1/2}
  // = 0.5215640468649398 sits 2.6e-5 away, an analytic truncation gap
  // of about exp(1/(2n)) - 1, so the finite-n oracle is the right target.
  auto det = dirlim::gaussian_determinant_integral(
      [](int j) { return 1.0 / (double(j) * double(j)); }, 10000);
  const double det_oracle_partial = 0.5215901244152737;
  const double det_inf = 0.5215640468649398;
  bool det_ok = std::abs(det.value - det_oracle_partial) <= 1e-6 && det.route_gap <= 1e-12;
  detail["determinant"] = {{"value", det.value},
                           {"closed", det.closed},
                           {"route_gap", det.route_gap},
                           {"oracle_partial_n1e4", det_oracle_partial},
                           {"infinite_product", det_inf},
                           {"distance_to_infinite", std::abs(det.value - det_inf)}};
  pass = pass && det_ok;

  // dominated-convergence counterexample: limits 0 for each f_n, 1 for f
  bool dct = zero.converged && std::abs(zero.limit(0, 0).real() - 1.0) <= 1e-10;
  json dlims = json::array();
  for (int nn : {2, 3, 4}) {
    auto ln = wa(-1.0 / nn);
    dct = dct && ln.converged && std::abs(ln.limit(0, 0).real()) <= 1e-3;
    dlims.push_back(ln.limit(0, 0).real());
  }
  detail["dominated_convergence_limits"] = dlims;
  pass = pass && dct;

  res.pass = pass;
  res.headline = std::string("case split ") + (case_split ? "ok" : "FAIL") + ", pv " +
                 fmt(std::abs(pv.limit(0, 0).real())) + ", det err " +
                 fmt(std::abs(det.value - det_oracle_partial)) + ", dct " + (dct ? "ok" : "FAIL");
  res.detail = detail;
  return res;
}

// ---------- A9: Monte Carlo vs chain consistency ----------
CriterionResult run_a9_impl(int threads) {
  CriterionResult res;
  Manifold M = Manifold::circle(1.0);
  CutoffProfile prof{1.0};
  auto B = bundles::BundleModel::rank2(M, "skew@0.5", "cosdiag@1,0.3");
  auto k4 = kernels::k_modified(4, B, M, prof);
  const double t = 0.3;
  const Point x(0.0), y(1.0);
  Partition P = Partition::uniform(4);

  auto grid = M.quadrature_grid(256);
  Eigen::MatrixXcd chain = pathint::kernel_chain(k4, P, t, x, y, grid, threads);
  auto F = [&](const pathint::GeodesicPolygon& poly) {
    return pathint::theorem_integrand(B, M, prof, t, poly);
  };
  auto mc = pathint::mc_path_integral(F, 2, M, t, P, x, y, 100000, 0);

  double worst_sigma = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double se = std::max(mc.std_error(i, j), 1e-9);
      worst_sigma = std::max(worst_sigma, std::abs(mc.value(i, j) - chain(i, j)) / se);
    }
  res.pass = worst_sigma <= 4.0;
  res.headline = "max |mc-chain|/se = " + fmt(worst_sigma) + " (<=4)";
  res.detail["chain"] = report::to_json(chain);
  res.detail["mc_value"] = report::to_json(mc.value);
  res.detail["worst_sigma"] = worst_sigma;
  res.detail["rejected"] = mc.rejected;
  return res;
}

// ---------- A10: Duhamel residual orders ----------
CriterionResult run_a10(int) {
  CriterionResult res;
  json detail;

  // k1 on S1 with v = cos: residual/e decays like t at fixed (x, y)
  Manifold s1 = Manifold::circle(1.0);
  CutoffProfile p1{1.0};
  auto Bc = bundles::BundleModel::line(s1, "cos");
  auto k1 = kernels::k_modified(1, Bc, s1, p1);
  auto vfield = fields::make_potential(s1, 1, "cos");
  const int G = 256;
  const Point x1(0.3);
  const double ytarget = 0.7;
  std::vector<double> ts{0.01, 0.02, 0.04, 0.08, 0.16};
  std::vector<double> ratios;
  for (double t : ts) {
    auto rep = kernels::duhamel_residual(k1, s1, vfield, t, x1, G, p1.eta);
    // pick the node nearest the pinned y
    std::size_t best = 0;
    double bd = 1e9;
    double want = s1.distance(x1, Point(ytarget));
    for (std::size_t i = 0; i < rep.y_distance.size(); ++i) {
      if (std::abs(rep.y_distance[i] - want) < bd) {
        bd = std::abs(rep.y_distance[i] - want);
        best = i;
      }
    }
    ratios.push_back(rep.ratio[best]);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double lx = std::log(ts[i]), ly = std::log(ratios[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(ts.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bool c1 = slope >= 0.8 && slope <= 1.2;
  detail["k1_slope"] = slope;
  detail["k1_ratios"] = ratios;
  detail["t_grid"] = ts;

  // bare Gaussian (with cutoff) on the flat torus
  Manifold t2 = Manifold::flat_torus(1.0, 1.0);
  CutoffProfile p2 = CutoffProfile::defaults(t2);
  auto g = kernels::gauss_chi_kernel(t2, p2);
  auto vzero = fields::make_potential(t2, 1, "zero");
  auto rep2 = kernels::duhamel_residual(g, t2, vzero, 0.01, Point(0.3, 0.4), 128, p2.eta);
  bool c2 = rep2.max_ratio_off_collar <= 1e-6;
  detail["torus"] = report::to_json(rep2);

  res.pass = c1 && c2;
  res.headline = "k1 slope " + fmt(slope) + " (1 +- 0.2); torus off-collar residual/e " +
                 fmt(rep2.max_ratio_off_collar) + " (<=1e-6)";
  res.detail = detail;
  return res;
}

using Runner = CriterionResult (*)(int);

const std::vector<std::pair<std::string, std::string>>& registry() {
  static const std::vector<std::pair<std::string, std::string>> reg = {
      {"A1", "S1 flat, zero potential: k4 chain vs spectral oracle, rel err <= 1e-3"},
      {"A2", "sphere Gaussian-with-cutoff source vs shifted spectral oracle, rel err <= 1e-2"},
      {"A3", "scalar potential v=cos on S1: k4 chain vs Fourier-Galerkin oracle, <= 1e-3"},
      {"A4", "rank-2 bundle with connection: ordered exponential vs Galerkin oracle, <= 1e-2"},
      {"A5", "k3/k4 chain difference: mesh exponent >= 1.2, terminal agreement"},
      {"A6", "heat-related regressions: k1/k2 beta >= 1.8, k3/k4 lemma form >= 1.3"},
      {"A7", "lower heat-kernel bound: positive fitted constant, stable under doubling"},
      {"A8", "renormalized-integral suite: case split, principal value, determinant, DCT"},
      {"A9", "Monte Carlo vs chain within 4 standard errors at n=1e5, r=4"},
      {"A10", "Duhamel residual orders: k1 slope 1 +- 0.2, torus residual <= 1e-6"},
  };
  return reg;
}

}  // namespace

std::vector<std::string> criterion_ids() {
  std::vector<std::string> out;
  for (const auto& [id, desc] : registry()) out.push_back(id);
  return out;
}

std::string criterion_description(const std::string& id) {
  for (const auto& [i, d] : registry())
    if (i == id) return d;
  throw ConfigError("unknown acceptance criterion '" + id + "'");
}

CriterionResult run_criterion(const std::string& id, int threads) {
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult res;
  if (id == "A1") res = run_a1(threads);
  else if (id == "A2") res = run_a2(threads);
  else if (id == "A3") res = run_a3(threads);
  else if (id == "A4") res = run_a4(threads);
  else if (id == "A5") res = run_a5(threads);
  else if (id == "A6") res = run_a6(threads);
  else if (id == "A7") res = run_a7(threads);
  else if (id == "A8") res = run_a8(threads);
  else if (id == "A9") res = run_a9_impl(threads);
  else if (id == "A10") res = run_a10(threads);
  else throw ConfigError("unknown acceptance criterion '" + id + "'");
  res.id = id;
  res.description = criterion_description(id);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

Summary run_manifest(const std::string& filter, int threads) {
  auto matches = [&](const std::string& id) {
    if (filter.empty() || filter == "*") return true;
    if (!filter.empty() && filter.back() == '*')
      return id.rfind(filter.substr(0, filter.size() - 1), 0) == 0;
    return id == filter;
  };
  Summary s;
  for (const auto& [id, desc] : registry()) {
    if (!matches(id)) continue;
    s.results.push_back(run_criterion(id, threads));
    s.all_pass = s.all_pass && s.results.back().pass;
  }
  if (s.results.empty()) throw ConfigError("acceptance filter '" + filter + "' matches nothing");
  return s;
}

report::json to_json(const Summary& s) {
  report::json rows = report::json::array();
  for (const auto& r : s.results) {
    report::json j;
    j["id"] = r.id;
    j["description"] = r.description;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["headline"] = r.headline;
    j["seconds"] = r.seconds;
    j["detail"] = r.detail;
    rows.push_back(j);
  }
  report::json out;
  out["criteria"] = rows;
  out["all_pass"] = s.all_pass;
  return out;
}

}  // namespace heatpath::accept
