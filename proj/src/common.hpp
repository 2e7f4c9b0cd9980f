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

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace heatpath {

enum class ErrorCode {
  InvalidArgument = 1,
  BadConfig,
  CutLocus,
  Domain,
  Truncation,
  Step,
  Assembly,
  NonPositiveOperator,
  UnsupportedModel,
  Resolution,
  Numeric,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

struct CutLocusError : Error {
  explicit CutLocusError(const std::string& w) : Error(ErrorCode::CutLocus, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::Domain, w) {}
};
struct TruncationError : Error {
  explicit TruncationError(const std::string& w) : Error(ErrorCode::Truncation, w) {}
};
struct StepError : Error {
  explicit StepError(const std::string& w) : Error(ErrorCode::Step, w) {}
};
struct AssemblyError : Error {
  explicit AssemblyError(const std::string& w) : Error(ErrorCode::Assembly, w) {}
};
struct NonPositiveOperatorError : Error {
  explicit NonPositiveOperatorError(const std::string& w) : Error(ErrorCode::NonPositiveOperator, w) {}
};
struct UnsupportedModelError : Error {
  explicit UnsupportedModelError(const std::string& w) : Error(ErrorCode::UnsupportedModel, w) {}
};
struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(ErrorCode::Resolution, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::BadConfig, w) {}
};

// Worker count used by grid sweeps. 0 = use all hardware threads.
// HEATPATH_THREADS (or --threads on the CLI) overrides the default.
int default_threads();
void set_default_threads(int n);

inline int resolve_threads(int requested) {
  int n = requested > 0 ? requested : default_threads();
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

// Runs body(i) for i in [0, n). Work is split into contiguous blocks, one per
// worker, so writes to disjoint per-index slots need no synchronization and
// results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, const Body& body, int threads = 0) {
  int nt = resolve_threads(threads);
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(nt, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t k = 0; k < nthreads; ++k) {
    std::size_t lo = k * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace heatpath
