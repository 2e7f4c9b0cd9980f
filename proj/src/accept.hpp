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

#include <string>
#include <vector>

#include "report.hpp"

namespace heatpath::accept {

// The experiment manifest: every headline criterion (A1..A10) maps to one
// fully pinned run configuration. Tolerances live here, in code.
struct CriterionResult {
  std::string id;
  std::string description;
  bool pass = false;
  std::string headline;
  report::json detail;
  double seconds = 0.0;
};

struct Summary {
  std::vector<CriterionResult> results;
  bool all_pass = true;
};

std::vector<std::string> criterion_ids();
std::string criterion_description(const std::string& id);
CriterionResult run_criterion(const std::string& id, int threads = 0);

// filter: exact id or a trailing-star glob like "A*"
Summary run_manifest(const std::string& filter, int threads = 0);
report::json to_json(const Summary& s);

}  // namespace heatpath::accept
