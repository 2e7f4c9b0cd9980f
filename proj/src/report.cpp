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
#include "report.hpp"

#include <sstream>

namespace heatpath::report {

json envelope(const std::string& subcommand, json config, json result) {
  json j;
  j["schema"] = kSchemaVersion;
  j["subcommand"] = subcommand;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  return j;
}

json to_json(const Eigen::MatrixXcd& m) {
  if (m.size() == 1 && std::abs(m(0, 0).imag()) < 1e-14) return m(0, 0).real();
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string divergence_name(dirlim::Divergence d) {
  switch (d) {
    case dirlim::Divergence::None: return "none";
    case dirlim::Divergence::PositiveInfinity: return "+infinity";
    case dirlim::Divergence::NegativeInfinity: return "-infinity";
    case dirlim::Divergence::Oscillating: return "oscillating";
  }
  return "none";
}

json to_json(const dirlim::LimitResult& r) {
  json j;
  json vals = json::array();
  for (const auto& v : r.values) vals.push_back(to_json(v));
  j["values"] = vals;
  j["converged"] = r.converged;
  j["limit"] = r.values.empty() ? json() : to_json(r.limit);
  j["error_estimate"] = r.error_estimate;
  j["divergence"] = divergence_name(r.divergence);
  return j;
}

json to_json(const pathint::ConvergenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    jr["level"] = row.level;
    jr["r"] = row.r;
    jr["mesh"] = row.mesh;
    if (row.grid_N > 0) jr["grid_N"] = row.grid_N;
    if (row.samples > 0) jr["samples"] = row.samples;
    jr["value"] = to_json(row.value);
    if (row.successive_diff >= 0) jr["successive_diff"] = row.successive_diff;
    if (row.oracle_error >= 0) jr["oracle_error"] = row.oracle_error;
    rows.push_back(jr);
  }
  json j;
  j["rows"] = rows;
  j["verdict"] = r.verdict;
  j["converged"] = r.converged;
  j["limit"] = r.rows.empty() ? json() : to_json(r.limit);
  j["error_estimate"] = r.error_estimate;
  if (r.exponent_valid) j["fitted_mesh_exponent"] = r.fitted_mesh_exponent;
  return j;
}

json to_json(const kernels::BoundFitReport& r) {
  json j;
  j["B"] = r.B;
  j["fitted_C"] = r.fitted_C;
  j["max_violation_ratio"] = r.max_violation_ratio;
  j["cap"] = r.cap;
  j["points"] = r.points;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

json to_json(const kernels::HeatRelatedReport& r) {
  json j;
  j["exactly_equal"] = r.exactly_equal;
  j["beta"] = r.beta;
  j["lemma_alpha"] = r.lemma_alpha;
  j["lemma_beta"] = r.lemma_beta;
  j["lemma_combined"] = r.lemma_combined;
  j["t_grid"] = r.t_grid;
  j["max_ratio"] = r.max_ratio;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

json to_json(const kernels::DuhamelReport& r) {
  json j;
  j["y_distance"] = r.y_distance;
  j["ratio"] = r.ratio;
  j["max_ratio"] = r.max_ratio;
  j["max_ratio_off_collar"] = r.max_ratio_off_collar;
  return j;
}

json to_json(const kernels::HsuReport& r) {
  json j;
  j["min_ratio"] = r.min_ratio;
  j["min_ratio_refined"] = r.min_ratio_refined;
  j["stability"] = r.stability;
  j["verdict"] = r.positive ? "pass" : "fail";
  return j;
}

std::string convergence_csv(const pathint::ConvergenceReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "mesh,value,oracle_error\n";
  for (const auto& row : r.rows) {
    double norm;
    if (row.value.size() == 1)
      norm = row.value(0, 0).real();
    else
      norm = row.value.jacobiSvd().singularValues()(0);
    os << row.mesh << "," << norm << ",";
    if (row.oracle_error >= 0) os << row.oracle_error;
    os << "\n";
  }
  return os.str();
}

}  // namespace heatpath::report
