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

#include <json.hpp>
#include <string>

#include "dirlim.hpp"
#include "kernels.hpp"
#include "pathint.hpp"

namespace heatpath::report {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Every report is wrapped in {schema, subcommand, config, result}; runs are
// self-describing.
json envelope(const std::string& subcommand, json config, json result);

json to_json(const Eigen::MatrixXcd& m);
json to_json(const dirlim::LimitResult& r);
json to_json(const pathint::ConvergenceReport& r);
json to_json(const kernels::BoundFitReport& r);
json to_json(const kernels::HeatRelatedReport& r);
json to_json(const kernels::DuhamelReport& r);
json to_json(const kernels::HsuReport& r);

std::string divergence_name(dirlim::Divergence d);

// CSV of (mesh, value, oracle_error) rows for convergence runs.
std::string convergence_csv(const pathint::ConvergenceReport& r);

}  // namespace heatpath::report
