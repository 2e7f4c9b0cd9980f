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
#include "heatpath/heatpath.h"

#include <cmath>
#include <cstring>
#include <string>

#include "accept.hpp"
#include "common.hpp"
#include "dirlim.hpp"
#include "pathint.hpp"
#include "report.hpp"

using namespace heatpath;
using report::json;

struct hp_session {
  int threads = 0;
  std::string last_error;
};

namespace {

hp_status status_from(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument: return HP_ERR_INVALID_ARG;
    case ErrorCode::BadConfig: return HP_ERR_BAD_CONFIG;
    case ErrorCode::CutLocus: return HP_ERR_CUT_LOCUS;
    case ErrorCode::Domain: return HP_ERR_DOMAIN;
    case ErrorCode::Truncation: return HP_ERR_TRUNCATION;
    case ErrorCode::Step: return HP_ERR_STEP;
    case ErrorCode::Assembly: return HP_ERR_ASSEMBLY;
    case ErrorCode::NonPositiveOperator: return HP_ERR_NON_POSITIVE_OPERATOR;
    case ErrorCode::UnsupportedModel: return HP_ERR_UNSUPPORTED_MODEL;
    case ErrorCode::Resolution: return HP_ERR_RESOLUTION;
    case ErrorCode::Numeric: return HP_ERR_NUMERIC;
    case ErrorCode::Internal: return HP_ERR_INTERNAL;
  }
  return HP_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

geom::Point point_from(const json& arr) {
  if (!arr.is_array() || arr.empty() || arr.size() > 2)
    throw ConfigError("points are arrays of 1 or 2 chart coordinates");
  geom::Point p;
  p.c[0] = arr[0].get<double>();
  if (arr.size() > 1) p.c[1] = arr[1].get<double>();
  return p;
}

geom::Point point_from_buf(const geom::Manifold& M, const double* v, size_t n) {
  size_t want = M.dim() == 1 ? 1 : 2;
  if (!v || n != want) throw ConfigError("point has the wrong number of coordinates");
  geom::Point p;
  p.c[0] = v[0];
  if (n > 1) p.c[1] = v[1];
  return M.canonical(p);
}

// ---- named real-line integrands for the renint subcommand ----
std::function<double(double)> real_integrand(const std::string& name) {
  auto at = name.find('@');
  std::string head = at == std::string::npos ? name : name.substr(0, at);
  double p0 = 0.0;
  if (at != std::string::npos) p0 = std::stod(name.substr(at + 1));
  if (head == "one") return [](double) { return 1.0; };
  if (head == "power") return [p0](double x) { return std::pow(std::abs(x) + 1.0, p0); };
  if (head == "inv_sqrt") return [](double x) { return 1.0 / std::sqrt(std::abs(x) + 1.0); };
  if (head == "one_over_x") return [](double x) { return 1.0 / x; };
  if (head == "one_over_x2") return [](double x) { return 1.0 / (x * x); };
  if (head == "one_over_x_plus_x2") return [](double x) { return 1.0 / x + x * x; };
  if (head == "cos") return [](double x) { return std::cos(x); };
  if (head == "gauss") return [](double x) { return std::exp(-0.5 * x * x); };
  if (head == "char_unit") return [](double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; };
  if (head == "lorentz_abs") return [](double x) { return 1.0 / (1.0 + std::abs(x)); };
  throw ConfigError("unknown integrand '" + name + "'");
}

std::function<double(int)> spectrum(const std::string& name) {
  auto at = name.find('@');
  std::string head = at == std::string::npos ? name : name.substr(0, at);
  if (head == "zero") return [](int) { return 0.0; };
  if (head == "inv-square") return [](int j) { return 1.0 / (double(j) * double(j)); };
  if (head == "list") {
    std::vector<double> vals;
    std::string rest = name.substr(at + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      vals.push_back(std::stod(rest.substr(pos, comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return [vals](int j) { return j <= (int)vals.size() ? vals[j - 1] : 0.0; };
  }
  throw ConfigError("unknown eigenvalue sequence '" + name + "'");
}

kernels::TimeKernel kernel_from(const json& cfg, const geom::Manifold& M,
                                const bundles::BundleModel& B, const kernels::CutoffProfile& prof) {
  std::string name = cfg.value("kernel", "k4");
  if (name == "gauss") return kernels::gauss_chi_kernel(M, prof);
  if (name == "spectral") return kernels::spectral_kernel(M, cfg.value("oracle_shift", 0.0));
  if (name == "k1" || name == "k2" || name == "k3" || name == "k4" || name == "theorem") {
    int level = name == "theorem" ? 4 : name[1] - '0';
    return kernels::k_modified(level, B, M, prof);
  }
  throw ConfigError("unknown kernel selector '" + name + "'");
}

// verdict semantics per subcommand: definite outcomes count as success
struct RunOutcome {
  json result;
  bool verdict = true;
};

RunOutcome run_renint(const json& cfg) {
  std::string mode = cfg.value("mode", "");
  double tol = cfg.value("tol", 1e-6);
  int max_steps = cfg.value("max_steps", 30);
  std::string sched_spec = cfg.value("schedule", "geometric:1:4");
  dirlim::ConvergeOptions opts;
  opts.tol = tol;
  opts.stall_window = cfg.value("stall_window", 3);
  RunOutcome out;

  if (mode == "window-average") {
    auto sched = dirlim::RefinementSchedule::parse(sched_spec, max_steps);
    auto r = dirlim::window_average_integral(real_integrand(cfg.value("f", "one")), sched, opts);
    out.result = report::to_json(r);
    out.verdict = r.converged || r.divergence != dirlim::Divergence::None;
  } else if (mode == "principal-value") {
    auto sched = dirlim::RefinementSchedule::parse(cfg.value("schedule", "geometric:0.5:0.5"),
                                                   max_steps);
    auto r = dirlim::principal_value(real_integrand(cfg.value("f", "one_over_x")), sched, opts);
    out.result = report::to_json(r);
    out.verdict = r.converged || r.divergence != dirlim::Divergence::None;
  } else if (mode == "determinant") {
    auto lam = spectrum(cfg.value("lambda", "inv-square"));
    if (cfg.contains("n")) {
      auto r = dirlim::gaussian_determinant_integral(lam, cfg["n"].get<int>());
      out.result = {{"value", r.value}, {"closed", r.closed}, {"route_gap", r.route_gap}};
      out.verdict = r.route_gap <= 1e-12;
    } else {
      auto sched = dirlim::RefinementSchedule::parse(cfg.value("schedule", "geometric:16:2"),
                                                     max_steps);
      auto r = dirlim::refine_until_converged(
          [&](double nf) {
            auto d = dirlim::gaussian_determinant_integral(lam, (int)std::lround(nf));
            return dirlim::scalar(d.value);
          },
          sched, opts);
      out.result = report::to_json(r);
      out.verdict = r.converged;
    }
  } else if (mode == "fourier") {
    auto f = real_integrand(cfg.value("f", "gauss"));
    auto cf = [f](double y) { return std::complex<double>(f(y), 0.0); };
    double lo = cfg.value("grid_min", -8.0), hi = cfg.value("grid_max", 8.0);
    int npts = cfg.value("grid_points", 65);
    std::vector<double> grid(npts);
    for (int i = 0; i < npts; ++i) grid[i] = lo + (hi - lo) * i / (npts - 1);
    auto sched = dirlim::RefinementSchedule::parse(cfg.value("schedule", "geometric:2:2"),
                                                   max_steps);
    auto r = dirlim::fourier_limit(cf, sched, grid, cfg.value("q", 2.0), opts);
    out.result = report::to_json(r);
    out.result["grid"] = grid;
    out.verdict = r.converged;
  } else {
    throw ConfigError("renint mode must be window-average|principal-value|determinant|fourier");
  }
  return out;
}

RunOutcome run_check(const json& cfg, int threads) {
  (void)threads;
  geom::Manifold M = geom::Manifold::parse(cfg.value("manifold", "s1:1"));
  bundles::BundleModel B = bundles::BundleModel::parse(M, cfg.value("bundle", "line"));
  kernels::CutoffProfile prof = kernels::CutoffProfile::defaults(M);
  if (cfg.contains("eta")) prof.eta = cfg["eta"].get<double>();

  std::vector<double> t_grid;
  if (cfg.contains("t_grid")) {
    for (const auto& v : cfg["t_grid"]) t_grid.push_back(v.get<double>());
  } else {
    for (int j = 0; j < 6; ++j) t_grid.push_back(0.0125 * (1 << j));
  }
  std::vector<double> B_list = cfg.value("B", std::vector<double>{1.0, 2.0});
  int n_pairs = cfg.value("pairs", 24);

  std::string mode = cfg.value("mode", "");
  RunOutcome out;
  if (mode == "heat-bound") {
    auto q = kernel_from(cfg, M, B, prof);
    auto pairs = kernels::make_pair_grid(M, n_pairs);
    auto rep = kernels::heat_bound_check(q, M, t_grid, pairs, B_list, cfg.value("cap", 1e6));
    out.result = report::to_json(rep);
    out.verdict = rep.pass;
  } else if (mode == "heat-related") {
    json cfg2 = cfg;
    cfg2["kernel"] = cfg.value("kernel2", "k2");
    auto q = kernel_from(cfg, M, B, prof);
    auto qp = kernel_from(cfg2, M, B, prof);
    auto pairs = kernels::make_pair_grid(M, n_pairs, 0.97 * prof.support());
    auto rep = kernels::heat_related_check(q, qp, M, t_grid, pairs, B_list);
    out.result = report::to_json(rep);
    out.verdict = rep.pass;
  } else if (mode == "duhamel") {
    auto q = kernel_from(cfg, M, B, prof);
    geom::Point x = cfg.contains("x") ? point_from(cfg["x"]) : geom::Point(0.3, 0.4);
    auto rep = kernels::duhamel_residual(q, M, B.potential, cfg.value("t", 0.02), x,
                                         cfg.value("grid_N", 256), prof.eta);
    out.result = report::to_json(rep);
    out.verdict = true;  // report-only mode
  } else if (mode == "hsu") {
    auto rep = kernels::hsu_check(M, t_grid, n_pairs, cfg.value("seed", 1ULL));
    out.result = report::to_json(rep);
    out.verdict = rep.positive && rep.stability <= 0.10;
  } else {
    throw ConfigError("check mode must be heat-bound|heat-related|duhamel|hsu");
  }
  return out;
}

RunOutcome run_heat_kernel(const json& cfg, int threads) {
  geom::Manifold M = geom::Manifold::parse(cfg.value("manifold", "s1:1"));
  bundles::BundleModel B = bundles::BundleModel::parse(M, cfg.value("bundle", "line"));
  kernels::CutoffProfile prof = kernels::CutoffProfile::defaults(M);
  if (cfg.contains("eta")) prof.eta = cfg["eta"].get<double>();
  double t = cfg.value("t", 0.5);
  geom::Point x = point_from(cfg.at("x"));
  geom::Point y = point_from(cfg.at("y"));

  pathint::LimitConfig lc;
  {
    std::string refinements = cfg.value("refinements", "1:5");
    auto colon = refinements.find(':');
    if (colon == std::string::npos) throw ConfigError("refinements must be k_min:k_max");
    lc.k_min = std::stoi(refinements.substr(0, colon));
    lc.k_max = std::stoi(refinements.substr(colon + 1));
  }
  lc.grid_N0 = cfg.value("grid", 32);
  lc.tol = cfg.value("tol", 1e-3);
  lc.stall_window = cfg.value("stall_window", 2);
  lc.samples = cfg.value("samples", 100000LL);
  lc.seed = cfg.value("seed", 0ULL);
  lc.threads = threads;

  pathint::OracleFn oracle = nullptr;
  std::string oracle_name = cfg.value("oracle", "none");
  std::shared_ptr<kernels::GalerkinOracle> gal;
  if (oracle_name == "spectral") {
    double shift = cfg.value("oracle_shift", 0.0);
    oracle = [M, shift](double tt, const geom::Point& a, const geom::Point& b) {
      return dirlim::scalar(kernels::spectral_heat_kernel(M, shift, tt, a, b));
    };
  } else if (oracle_name == "galerkin") {
    gal = std::make_shared<kernels::GalerkinOracle>(M, B);
    oracle = [gal](double tt, const geom::Point& a, const geom::Point& b) {
      return gal->kernel(tt, a, b);
    };
  } else if (oracle_name != "none") {
    throw ConfigError("oracle must be spectral|galerkin|none");
  }

  std::string mode = cfg.value("mode", "chain");
  pathint::ConvergenceReport rep;
  if (mode == "chain") {
    auto q = kernel_from(cfg, M, B, prof);
    rep = pathint::path_integral_limit(q, M, t, x, y, lc, oracle);
  } else if (mode == "mc") {
    if (cfg.value("kernel", "theorem") == "theorem") {
      rep = pathint::path_integral_limit_mc(B, M, prof, t, x, y, lc, oracle);
    } else {
      auto q = kernel_from(cfg, M, B, prof);
      rep = pathint::path_integral_limit_mc_kernel(q, M, t, x, y, lc, oracle);
    }
  } else {
    throw ConfigError("heat-kernel mode must be chain|mc");
  }

  RunOutcome out;
  out.result = report::to_json(rep);
  out.result["csv"] = report::convergence_csv(rep);
  double terminal = rep.rows.empty() ? -1.0 : rep.rows.back().oracle_error;
  if (oracle)
    out.verdict = rep.converged && terminal >= 0 && terminal <= lc.tol;
  else
    out.verdict = rep.converged;
  return out;
}

RunOutcome run_oracle(const json& cfg) {
  geom::Manifold M = geom::Manifold::parse(cfg.value("manifold", "s1:1"));
  double t = cfg.value("t", 0.5);
  geom::Point x = point_from(cfg.at("x"));
  geom::Point y = point_from(cfg.at("y"));
  std::string kind = cfg.value("kind", "spectral");
  RunOutcome out;
  if (kind == "spectral") {
    double v = kernels::spectral_heat_kernel(M, cfg.value("shift", 0.0), t, x, y);
    out.result = {{"value", v}};
  } else if (kind == "galerkin") {
    bundles::BundleModel B = bundles::BundleModel::parse(M, cfg.value("bundle", "line"));
    kernels::GalerkinOracle gal(M, B);
    out.result = {{"value", report::to_json(gal.kernel(t, x, y))}, {"modes", gal.modes()}};
  } else {
    throw ConfigError("oracle kind must be spectral|galerkin");
  }
  return out;
}

}  // namespace

extern "C" {

const char* hp_version(void) { return "1.0.0"; }

hp_status hp_session_create(hp_session** out) {
  if (!out) return HP_ERR_INVALID_ARG;
  *out = new hp_session();
  return HP_OK;
}

void hp_session_destroy(hp_session* s) { delete s; }

hp_status hp_session_set_threads(hp_session* s, int threads) {
  if (!s || threads < 0) return HP_ERR_INVALID_ARG;
  s->threads = threads;
  return HP_OK;
}

const char* hp_last_error(const hp_session* s) { return s ? s->last_error.c_str() : ""; }

void hp_string_free(char* str) { std::free(str); }

hp_status hp_run_json(hp_session* s, const char* config_json, char** report_json) {
  if (!s || !config_json || !report_json) return HP_ERR_INVALID_ARG;
  *report_json = nullptr;
  s->last_error.clear();
  try {
    json cfg = json::parse(config_json);
    std::string sub = cfg.value("subcommand", "");
    if (cfg.contains("threads")) s->threads = cfg["threads"].get<int>();
    if (s->threads > 0) set_default_threads(s->threads);
    RunOutcome out;
    if (sub == "renint") out = run_renint(cfg);
    else if (sub == "check") out = run_check(cfg, s->threads);
    else if (sub == "heat-kernel") out = run_heat_kernel(cfg, s->threads);
    else if (sub == "oracle") out = run_oracle(cfg);
    else if (sub == "accept") {
      auto summary = accept::run_manifest(cfg.value("filter", "*"), s->threads);
      out.result = accept::to_json(summary);
      out.verdict = summary.all_pass;
    } else {
      throw ConfigError("unknown subcommand '" + sub + "'");
    }
    json rep = report::envelope(sub, cfg, out.result);
    rep["verdict"] = out.verdict ? "pass" : "fail";
    *report_json = dup_string(rep.dump(2));
    return out.verdict ? HP_OK : HP_ERR_VERDICT_FAILED;
  } catch (const json::exception& e) {
    s->last_error = std::string("config parse error: ") + e.what();
    return HP_ERR_BAD_CONFIG;
  } catch (const Error& e) {
    s->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return HP_ERR_INTERNAL;
  }
}

hp_status hp_distance(hp_session* s, const char* manifold_spec, const double* x, size_t x_len,
                      const double* y, size_t y_len, double* out) {
  if (!s || !manifold_spec || !out) return HP_ERR_INVALID_ARG;
  try {
    geom::Manifold M = geom::Manifold::parse(manifold_spec);
    *out = M.distance(point_from_buf(M, x, x_len), point_from_buf(M, y, y_len));
    return HP_OK;
  } catch (const Error& e) {
    s->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return HP_ERR_INTERNAL;
  }
}

hp_status hp_gauss_kernel(hp_session* s, const char* manifold_spec, double t, const double* x,
                          size_t x_len, const double* y, size_t y_len, double* out) {
  if (!s || !manifold_spec || !out) return HP_ERR_INVALID_ARG;
  try {
    geom::Manifold M = geom::Manifold::parse(manifold_spec);
    double d = M.distance(point_from_buf(M, x, x_len), point_from_buf(M, y, y_len));
    *out = kernels::gauss_e(M.dim(), t, d);
    return HP_OK;
  } catch (const Error& e) {
    s->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return HP_ERR_INTERNAL;
  }
}

hp_status hp_spectral_heat_kernel(hp_session* s, const char* manifold_spec, double c_shift,
                                  double t, const double* x, size_t x_len, const double* y,
                                  size_t y_len, double* out) {
  if (!s || !manifold_spec || !out) return HP_ERR_INVALID_ARG;
  try {
    geom::Manifold M = geom::Manifold::parse(manifold_spec);
    *out = kernels::spectral_heat_kernel(M, c_shift, t, point_from_buf(M, x, x_len),
                                         point_from_buf(M, y, y_len));
    return HP_OK;
  } catch (const Error& e) {
    s->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return HP_ERR_INTERNAL;
  }
}

hp_status hp_renorm_constant(hp_session* s, const double* breakpoints, size_t n, int dim, double t,
                             double* out) {
  if (!s || !breakpoints || n < 2 || !out) return HP_ERR_INVALID_ARG;
  try {
    pathint::Partition P;
    P.s.assign(breakpoints, breakpoints + n);
    P.validate();
    *out = pathint::renorm_constant(P, dim, t);
    return HP_OK;
  } catch (const Error& e) {
    s->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return HP_ERR_INTERNAL;
  }
}

}  // extern "C"
