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

// Acceptance gate: runs every criterion in the experiment manifest and
// prints one pass/fail line each. Exit code 0 iff all pass.

#include <cstdio>
#include <cstring>
#include <exception>

#include "accept.hpp"

int main(int argc, char** argv) {
  std::string filter = "*";
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--filter=", 9) == 0) filter = argv[i] + 9;
  }
  bool all = true;
  try {
    for (const auto& id : heatpath::accept::criterion_ids()) {
      if (filter != "*" && !(filter == id ||
                             (filter.back() == '*' &&
                              id.rfind(filter.substr(0, filter.size() - 1), 0) == 0)))
        continue;
      auto r = heatpath::accept::run_criterion(id);
      std::printf("%-4s %-5s %7.1fs  %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                  r.headline.c_str());
      std::fflush(stdout);
      all = all && r.pass;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s\n", all ? "ACCEPTANCE: ALL PASS" : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
