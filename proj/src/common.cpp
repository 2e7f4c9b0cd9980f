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
#include "common.hpp"

#include <atomic>

namespace heatpath {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("HEATPATH_THREADS");
  if (!s) return 0;
  int v = std::atoi(s);
  return v > 0 ? v : 0;
}
}  // namespace

int default_threads() {
  int v = g_threads.load();
  if (v > 0) return v;
  int e = env_threads();
  if (e > 0) return e;
  return static_cast<int>(std::thread::hardware_concurrency());
}

void set_default_threads(int n) { g_threads.store(n > 0 ? n : 0); }

}  // namespace heatpath
