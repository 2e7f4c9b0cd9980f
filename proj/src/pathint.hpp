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

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bundles.hpp"
#include "geometry.hpp"
#include "kernels.hpp"

namespace heatpath::pathint {

// Subdivision 0 = s_0 < ... < s_r = 1 of the time interval.
struct Partition {
  std::vector<double> s;

  static Partition uniform(int r);
  int segments() const { return static_cast<int>(s.size()) - 1; }
  double mesh() const;
  bool subdivides(const Partition& coarser) const;
  void validate() const;  // strict monotonicity, endpoints 0 and 1
};

// A partition plus a vertex tuple; consecutive vertices must avoid each
// other's cut locus. Tuples violating that are only representable through
// the `rejected` marker, for Monte Carlo accounting.
struct GeodesicPolygon {
  Partition partition;
  std::vector<geom::Point> vertices;
  bool rejected = false;

  static GeodesicPolygon make(const geom::Manifold& M, Partition P,
                              std::vector<geom::Point> verts);  // throws CutLocusError
  static GeodesicPolygon try_make(const geom::Manifold& M, Partition P,
                                  std::vector<geom::Point> verts);  // marks rejected instead
};

// Z(P,m,t) = prod_j (4 pi t (s_j - s_{j-1}))^{m/2}
double renorm_constant(const Partition& P, int dim, double t);

// E[gamma] = 1/2 sum_j d(x_{j-1}, x_j)^2 / (s_j - s_{j-1})
double polygon_energy(const geom::Manifold& M, const GeodesicPolygon& poly);

// Xi(P,gamma) = prod_j chi(d(x_{j-1}, x_j))
double cutoff_product(const kernels::CutoffProfile& profile, const geom::Manifold& M,
                      const GeodesicPolygon& poly);

// Xi * exp(-E/2t + (t/3) int scal) * ordered exponential of -tV.
// Maps E_x -> E_y for a polygon from x to y; equals Z * K^4 segmentwise.
Eigen::MatrixXcd theorem_integrand(const bundles::BundleModel& B, const geom::Manifold& M,
                                   const kernels::CutoffProfile& profile, double t,
                                   const GeodesicPolygon& poly, bool ordered = true,
                                   int quad_nodes = 8);

// (r-1)-fold fiberwise quadrature composition of q along the partition;
// returns the approximation to q-chain value k(t, y, x) in Hom(E_x, E_y).
Eigen::MatrixXcd kernel_chain(const kernels::TimeKernel& q, const Partition& P, double t,
                              const geom::Point& x, const geom::Point& y,
                              const geom::QuadratureGrid& grid, int threads = 0);

struct McResult {
  Eigen::MatrixXcd value;
  Eigen::MatrixXd std_error;
  long long rejected = 0;
  long long samples = 0;
};

using PolygonIntegrand = std::function<Eigen::MatrixXcd(const GeodesicPolygon&)>;

// Plain Monte Carlo over interior vertices drawn uniformly from the
// normalized Riemannian volume; estimator of the stage-P path integral
//   E[F] * vol(M)^{r-1} / Z(P,m,t),  F = theorem integrand (or Z Q_t).
McResult mc_path_integral(const PolygonIntegrand& F, int rank, const geom::Manifold& M, double t,
                          const Partition& P, const geom::Point& x, const geom::Point& y,
                          long long n_samples, unsigned long long seed);
McResult mc_path_integral_kernel(const kernels::TimeKernel& q, const geom::Manifold& M, double t,
                                 const Partition& P, const geom::Point& x, const geom::Point& y,
                                 long long n_samples, unsigned long long seed);

struct ConvergenceRow {
  int level = 0;
  int r = 0;
  double mesh = 0.0;
  int grid_N = 0;
  long long samples = 0;
  Eigen::MatrixXcd value;
  double successive_diff = -1.0;  // relative; -1 on the first row
  double oracle_error = -1.0;     // relative spectral-norm error; -1 without oracle
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool converged = false;
  std::string verdict;        // converged | exhausted | diverged
  Eigen::MatrixXcd limit;
  double error_estimate = 0.0;
  double fitted_mesh_exponent = 0.0;  // present only with >= 4 usable rows
  bool exponent_valid = false;
};

struct LimitConfig {
  int k_min = 1;
  int k_max = 5;
  int grid_N0 = 32;
  double tol = 1e-3;
  int stall_window = 2;
  bool monte_carlo = false;
  long long samples = 100000;
  unsigned long long seed = 0;
  int threads = 0;
};

using OracleFn = std::function<Eigen::MatrixXcd(double, const geom::Point&, const geom::Point&)>;

// Evaluates the chain (or MC estimator) over the dyadic ladder r = 2^k with
// the grid resolution doubling alongside r, and drives the directed-limit
// convergence decision. The computed object is k^H(t, y, x).
ConvergenceReport path_integral_limit(const kernels::TimeKernel& q, const geom::Manifold& M,
                                      double t, const geom::Point& x, const geom::Point& y,
                                      const LimitConfig& cfg, const OracleFn& oracle = nullptr);

// MC flavor driven by the theorem integrand.
ConvergenceReport path_integral_limit_mc(const bundles::BundleModel& B, const geom::Manifold& M,
                                         const kernels::CutoffProfile& profile, double t,
                                         const geom::Point& x, const geom::Point& y,
                                         const LimitConfig& cfg, const OracleFn& oracle = nullptr);

// MC flavor for a supplied kernel, estimating Z Q_t.
ConvergenceReport path_integral_limit_mc_kernel(const kernels::TimeKernel& q,
                                                const geom::Manifold& M, double t,
                                                const geom::Point& x, const geom::Point& y,
                                                const LimitConfig& cfg,
                                                const OracleFn& oracle = nullptr);

}  // namespace heatpath::pathint
