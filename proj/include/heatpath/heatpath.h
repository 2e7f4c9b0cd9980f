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
#ifndef HEATPATH_H
#define HEATPATH_H

/* C surface of the heatpath library.
 *
 * The engine is driven by JSON run configurations and answers with JSON
 * reports (schema version 1). hp_run_json covers every subcommand the CLI
 * exposes: renint, check, heat-kernel, oracle, accept. A few scalar
 * primitives are exported directly for callers that only need geometry or
 * single kernel values.
 *
 * All strings returned through char** are heap-allocated; release them with
 * hp_string_free. Every entry point returns an hp_status; on failure a
 * human-readable message is kept per session (hp_last_error).
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hp_session hp_session;

typedef enum hp_status {
  HP_OK = 0,
  HP_ERR_INVALID_ARG = 1,
  HP_ERR_BAD_CONFIG = 2,
  HP_ERR_CUT_LOCUS = 3,
  HP_ERR_DOMAIN = 4,
  HP_ERR_TRUNCATION = 5,
  HP_ERR_STEP = 6,
  HP_ERR_ASSEMBLY = 7,
  HP_ERR_NON_POSITIVE_OPERATOR = 8,
  HP_ERR_UNSUPPORTED_MODEL = 9,
  HP_ERR_RESOLUTION = 10,
  HP_ERR_NUMERIC = 11,
  HP_ERR_INTERNAL = 12,
  HP_ERR_VERDICT_FAILED = 13
} hp_status;

const char* hp_version(void);

hp_status hp_session_create(hp_session** out);
void hp_session_destroy(hp_session* s);

/* Worker threads for grid sweeps; 0 restores the HEATPATH_THREADS /
 * hardware default. */
hp_status hp_session_set_threads(hp_session* s, int threads);

/* Last error message recorded on this session (empty string when none). */
const char* hp_last_error(const hp_session* s);

/* Runs one experiment described by config_json and hands back the JSON
 * report. Returns HP_ERR_VERDICT_FAILED when the run finished but its
 * verdict is negative (the report is still produced). */
hp_status hp_run_json(hp_session* s, const char* config_json, char** report_json);

void hp_string_free(char* str);

/* -------- direct primitives -------- */

/* manifold_spec: "s1:R", "t2:L1,L2", "s2:R"; points are chart coordinates
 * (1 value for s1, 2 for t2/s2). */
hp_status hp_distance(hp_session* s, const char* manifold_spec, const double* x, size_t x_len,
                      const double* y, size_t y_len, double* out);

/* (4 pi t)^{-m/2} exp(-d(x,y)^2/4t) */
hp_status hp_gauss_kernel(hp_session* s, const char* manifold_spec, double t, const double* x,
                          size_t x_len, const double* y, size_t y_len, double* out);

/* Heat kernel of Delta + c by eigenfunction summation. */
hp_status hp_spectral_heat_kernel(hp_session* s, const char* manifold_spec, double c_shift,
                                  double t, const double* x, size_t x_len, const double* y,
                                  size_t y_len, double* out);

/* Z(P, dim, t) for breakpoints 0 = s_0 < ... < s_r = 1. */
hp_status hp_renorm_constant(hp_session* s, const double* breakpoints, size_t n, int dim, double t,
                             double* out);

#ifdef __cplusplus
}
#endif

#endif /* HEATPATH_H */
