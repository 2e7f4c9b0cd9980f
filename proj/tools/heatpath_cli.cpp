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

// Command-line front end. Flags are folded into a JSON run configuration and
// handed to the shared library; reports come back as JSON.

#include <CLI11.hpp>
#include <json.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "heatpath/heatpath.h"

using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string out_path;
  std::string csv_path;
  int threads = 0;
  unsigned long long seed = 0;
};

int submit(hp_session* session, const json& cfg, const Common& common) {
  char* rep = nullptr;
  hp_status st = hp_run_json(session, cfg.dump().c_str(), &rep);
  if (!rep) {
    std::cerr << "error: " << hp_last_error(session) << "\n";
    return st == HP_ERR_BAD_CONFIG || st == HP_ERR_INVALID_ARG ? 2 : 1;
  }
  std::string text(rep);
  hp_string_free(rep);
  if (common.out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(common.out_path);
    f << text << "\n";
  }
  if (!common.csv_path.empty()) {
    auto parsed = json::parse(text);
    if (parsed["result"].contains("csv")) {
      std::ofstream f(common.csv_path);
      f << parsed["result"]["csv"].get<std::string>();
    }
  }
  if (st == HP_OK) return 0;
  if (st == HP_ERR_VERDICT_FAILED) return 1;
  std::cerr << "error: " << hp_last_error(session) << "\n";
  return st == HP_ERR_BAD_CONFIG || st == HP_ERR_INVALID_ARG ? 2 : 1;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out_path, "write the JSON report here instead of stdout");
  app->add_option("--threads", c.threads, "worker threads (default: all cores)");
  app->add_option("--seed", c.seed, "random seed (default 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heatpath: renormalized integrals and heat-kernel path integrals"};
  app.require_subcommand(1);

  hp_session* session = nullptr;
  hp_session_create(&session);

  Common common;
  json cfg;
  int rc = 0;

  // ---- renint ----
  auto* renint = app.add_subcommand("renint", "renormalized-integral examples");
  std::string ri_mode, ri_f = "one", ri_schedule, ri_lambda = "inv-square";
  double ri_tol = 1e-6, ri_q = 2.0;
  int ri_steps = 30, ri_n = -1;
  renint->add_option("mode", ri_mode, "window-average|principal-value|determinant|fourier")
      ->required();
  renint->add_option("--f", ri_f, "integrand name (one, power@a, one_over_x, cos, gauss, ...)");
  renint->add_option("--tol", ri_tol, "relative stall tolerance");
  renint->add_option("--max-steps", ri_steps, "schedule length");
  renint->add_option("--schedule", ri_schedule, "<geometric|linear>:<start>:<factor-or-step>");
  renint->add_option("--lambda", ri_lambda, "eigenvalue sequence for determinant mode");
  renint->add_option("--n", ri_n, "fixed truncation dimension for determinant mode");
  renint->add_option("--q", ri_q, "grid norm exponent for fourier mode");
  add_common(renint, common);

  // ---- check ----
  auto* check = app.add_subcommand("check", "kernel verifiers");
  std::string ck_mode, ck_manifold = "s1:1", ck_bundle = "line", ck_kernel = "k4",
              ck_kernel2 = "k2";
  double ck_eta = -1.0, ck_t = 0.02;
  int ck_pairs = 24, ck_grid = 256;
  check->add_option("mode", ck_mode, "heat-bound|heat-related|duhamel|hsu")->required();
  check->add_option("--manifold", ck_manifold, "s1:R | t2:L1,L2 | s2:R");
  check->add_option("--bundle", ck_bundle, "line[:V] | rank2:<A>:<V> | tangent-s2[:V]");
  check->add_option("--kernel", ck_kernel, "gauss|k1|k2|k3|k4|spectral");
  check->add_option("--kernel2", ck_kernel2, "second kernel for heat-related");
  check->add_option("--eta", ck_eta, "cutoff scale (default min(inj,1)/4)");
  check->add_option("--t", ck_t, "time for duhamel mode");
  check->add_option("--pairs", ck_pairs, "number of sample pairs");
  check->add_option("--grid", ck_grid, "spatial grid for duhamel mode");
  add_common(check, common);

  // ---- heat-kernel ----
  auto* hk = app.add_subcommand("heat-kernel", "path-integral convergence runs");
  std::string hk_manifold = "s1:1", hk_bundle = "line", hk_kernel = "k4", hk_mode = "chain",
              hk_oracle = "none", hk_refine = "1:5";
  std::vector<double> hk_x{0.0}, hk_y{1.0};
  double hk_t = 0.5, hk_tol = 1e-3, hk_eta = -1.0, hk_shift = 0.0;
  int hk_grid = 32;
  long long hk_samples = 100000;
  hk->add_option("--manifold", hk_manifold, "s1:R | t2:L1,L2 | s2:R");
  hk->add_option("--bundle", hk_bundle, "bundle spec");
  hk->add_option("--kernel", hk_kernel, "k1|k2|k3|k4|gauss|theorem");
  hk->add_option("--t", hk_t, "time");
  hk->add_option("--x", hk_x, "chart coordinates of x")->expected(1, 2);
  hk->add_option("--y", hk_y, "chart coordinates of y")->expected(1, 2);
  hk->add_option("--refinements", hk_refine, "k_min:k_max dyadic ladder");
  hk->add_option("--grid", hk_grid, "grid resolution N0 at the coarsest rung");
  hk->add_option("--mode", hk_mode, "chain|mc");
  hk->add_option("--samples", hk_samples, "MC samples per rung");
  hk->add_option("--oracle", hk_oracle, "spectral|galerkin|none");
  hk->add_option("--oracle-shift", hk_shift, "constant c for the spectral oracle of Delta+c");
  hk->add_option("--tol", hk_tol, "stall tolerance / oracle acceptance tolerance");
  hk->add_option("--eta", hk_eta, "cutoff scale");
  hk->add_option("--csv", common.csv_path, "write (mesh,value,oracle_error) rows here");
  add_common(hk, common);

  // ---- oracle ----
  auto* orc = app.add_subcommand("oracle", "evaluate reference kernels");
  std::string or_manifold = "s1:1", or_bundle = "line", or_kind = "spectral";
  std::vector<double> or_x{0.0}, or_y{1.0};
  double or_t = 0.5, or_shift = 0.0;
  orc->add_option("--manifold", or_manifold);
  orc->add_option("--bundle", or_bundle);
  orc->add_option("--kind", or_kind, "spectral|galerkin");
  orc->add_option("--shift", or_shift, "spectral shift c");
  orc->add_option("--t", or_t);
  orc->add_option("--x", or_x)->expected(1, 2);
  orc->add_option("--y", or_y)->expected(1, 2);
  add_common(orc, common);

  // ---- accept ----
  auto* acc = app.add_subcommand("accept", "run the acceptance manifest");
  std::string ac_filter = "*";
  acc->add_option("--filter", ac_filter, "criterion id or glob like A*");
  add_common(acc, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    hp_session_destroy(session);
    return code == 0 ? 0 : 2;
  }

  if (common.threads > 0) hp_session_set_threads(session, common.threads);

  if (renint->parsed()) {
    cfg = {{"subcommand", "renint"}, {"mode", ri_mode}, {"f", ri_f},
           {"tol", ri_tol},          {"max_steps", ri_steps}};
    if (!ri_schedule.empty()) cfg["schedule"] = ri_schedule;
    if (ri_mode == "determinant") {
      cfg["lambda"] = ri_lambda;
      if (ri_n > 0) cfg["n"] = ri_n;
    }
    if (ri_mode == "fourier") cfg["q"] = ri_q;
    rc = submit(session, cfg, common);
  } else if (check->parsed()) {
    cfg = {{"subcommand", "check"}, {"mode", ck_mode},     {"manifold", ck_manifold},
           {"bundle", ck_bundle},   {"kernel", ck_kernel}, {"kernel2", ck_kernel2},
           {"t", ck_t},             {"pairs", ck_pairs},   {"grid_N", ck_grid},
           {"seed", common.seed}};
    if (ck_eta > 0) cfg["eta"] = ck_eta;
    rc = submit(session, cfg, common);
  } else if (hk->parsed()) {
    cfg = {{"subcommand", "heat-kernel"},
           {"manifold", hk_manifold},
           {"bundle", hk_bundle},
           {"kernel", hk_kernel},
           {"t", hk_t},
           {"x", hk_x},
           {"y", hk_y},
           {"refinements", hk_refine},
           {"grid", hk_grid},
           {"mode", hk_mode},
           {"samples", hk_samples},
           {"oracle", hk_oracle},
           {"oracle_shift", hk_shift},
           {"tol", hk_tol},
           {"seed", common.seed}};
    if (hk_eta > 0) cfg["eta"] = hk_eta;
    rc = submit(session, cfg, common);
  } else if (orc->parsed()) {
    cfg = {{"subcommand", "oracle"}, {"manifold", or_manifold}, {"bundle", or_bundle},
           {"kind", or_kind},        {"shift", or_shift},       {"t", or_t},
           {"x", or_x},              {"y", or_y}};
    rc = submit(session, cfg, common);
  } else if (acc->parsed()) {
    cfg = {{"subcommand", "accept"}, {"filter", ac_filter}};
    char* rep = nullptr;
    hp_status st = hp_run_json(session, cfg.dump().c_str(), &rep);
    if (!rep) {
      std::cerr << "error: " << hp_last_error(session) << "\n";
      hp_session_destroy(session);
      return 2;
    }
    std::string text(rep);
    hp_string_free(rep);
    auto parsed = json::parse(text);
    for (const auto& row : parsed["result"]["criteria"]) {
      std::printf("%-4s %-5s %8.1fs  %s\n", row["id"].get<std::string>().c_str(),
                  row["verdict"].get<std::string>().c_str(), row["seconds"].get<double>(),
                  row["headline"].get<std::string>().c_str());
    }
    if (!common.out_path.empty()) {
      std::ofstream f(common.out_path);
      f << text << "\n";
    }
    rc = st == HP_OK ? 0 : 1;
  }

  hp_session_destroy(session);
  return rc;
}
