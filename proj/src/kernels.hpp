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
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "bundles.hpp"
#include "geometry.hpp"

namespace heatpath::kernels {

// Smooth cutoff: chi == 1 on (-inf, eta], chi == 0 on [2 eta, inf),
// monotone, C-infinity via the standard exp(-1/u) bump.
struct CutoffProfile {
  double eta = 0.25;
  double chi(double d) const;
  double support() const { return 2.0 * eta; }
  static CutoffProfile defaults(const geom::Manifold& M);  // min(inj, 1)/4
};

// Continuous time-dependent integral kernel q(t,x,y) in Hom(E_y, E_x),
// density against dy.
struct TimeKernel {
  std::string name;
  std::string manifold_spec;
  int rank = 1;
  double t_max = 1.0;
  bool is_real = true;
  bool zonal = false;  // scalar and a function of (t, d(x,y)) only
  double support_radius = std::numeric_limits<double>::infinity();
  // writes rank*rank values, column-major (Eigen layout)
  std::function<void(double, const geom::Point&, const geom::Point&, std::complex<double>*)> eval;
  std::function<double(double, double)> zonal_eval;  // (t, d) when zonal

  Eigen::MatrixXcd operator()(double t, const geom::Point& x, const geom::Point& y) const {
    Eigen::MatrixXcd m(rank, rank);
    eval(t, x, y, m.data());
    return m;
  }
};

// e(t,x,y) = (4 pi t)^{-m/2} exp(-d^2 / 4t)
double gauss_e(int dim, double t, double d);
TimeKernel gauss_kernel(const geom::Manifold& M);
TimeKernel gauss_chi_kernel(const geom::Manifold& M, const CutoffProfile& profile);

// Leading heat coefficient a0 along the shortest geodesic. 1 on flat models;
// (theta/sin theta)^{1/2} on the sphere, theta = d/R.
double a0_scalar(const geom::Manifold& M, double d);

// a1 on the diagonal: scal(x)/6 * Id - V(x).
Eigen::MatrixXcd a1_diag(const bundles::BundleModel& B, const geom::Manifold& M,
                         const geom::Point& x);

// Kernel modifications k1..k4. Levels 1-2 need off-diagonal a1 and exist only
// on flat models with a trivial connection; 3-4 work on every model.
TimeKernel k_modified(int level, const bundles::BundleModel& B, const geom::Manifold& M,
                      const CutoffProfile& profile);

// Exact heat kernel of Delta + c via eigenfunction sums; tail below tail_tol.
double spectral_heat_kernel(const geom::Manifold& M, double c_shift, double t,
                            const geom::Point& x, const geom::Point& y, double tail_tol = 1e-14);
TimeKernel spectral_kernel(const geom::Manifold& M, double c_shift, double tail_tol = 1e-14);

// Poisson-summation form of the circle heat kernel (independent cross-check).
double periodized_gauss_circle(double R, double t, double arc, double tail_tol = 1e-16);

// Fourier-Galerkin semigroup oracle on S1 for H = nabla*nabla + V.
class GalerkinOracle {
public:
  GalerkinOracle(const geom::Manifold& M, const bundles::BundleModel& B, int initial_modes = 16,
                 double stabilize_tol = 1e-10);
  Eigen::MatrixXcd kernel(double t, const geom::Point& x, const geom::Point& y) const;
  int modes() const { return N_; }
  int rank() const { return rank_; }
  TimeKernel as_time_kernel() const;

private:
  void assemble(int N);
  geom::Manifold M_;
  bundles::BundleModel B_;
  int rank_;
  int N_ = 0;
  std::vector<int> ns_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXcd evecs_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// ---- numerical verifiers ----

struct PairGrid {
  std::vector<geom::Point> xs, ys;
  std::vector<double> d;
};
// Pairs with one foot fixed and distances sweeping (0, dmax].
PairGrid make_pair_grid(const geom::Manifold& M, int n, double dmax = 0.0);
PairGrid make_random_pairs(const geom::Manifold& M, int n, unsigned long long seed);

struct BoundFitReport {
  std::vector<double> B;
  double fitted_C = 0.0;
  double max_violation_ratio = 0.0;  // vs k + C_cap t sum k(B_j t)
  double cap = 0.0;
  bool pass = false;
  std::size_t points = 0;
};
// Fits the smallest C >= 0 with |q| <= kDelta(t) + C t sum_j kDelta(B_j t) on
// the grid; fails when only C > cap would work.
BoundFitReport heat_bound_check(const TimeKernel& q, const geom::Manifold& M,
                                const std::vector<double>& t_grid, const PairGrid& pairs,
                                const std::vector<double>& B_list, double C_cap = 1e6);

struct HeatRelatedReport {
  bool exactly_equal = false;
  double beta = 0.0;            // slope of max-ratio vs t
  double lemma_alpha = 0.0;     // joint fit of |q-q'| ~ C e d^alpha t^beta
  double lemma_beta = 0.0;
  double lemma_combined = 0.0;  // lemma_beta + lemma_alpha/2
  bool pass = false;
  std::vector<double> t_grid;
  std::vector<double> max_ratio;  // per t
};
HeatRelatedReport heat_related_check(const TimeKernel& q, const TimeKernel& qp,
                                     const geom::Manifold& M, const std::vector<double>& t_grid,
                                     const PairGrid& pairs, const std::vector<double>& B_list);

struct DuhamelReport {
  std::vector<double> y_distance;
  std::vector<double> ratio;  // |(d_t + H_x) k| / e per y node
  double max_ratio = 0.0;
  double max_ratio_off_collar = 0.0;  // restricted to d <= 0.9 eta
};
// (d_t + H_x) k with 4th-order time differences and spectral differentiation
// in x; scalar kernels on S1 or T2, H = Delta + v.
DuhamelReport duhamel_residual(const TimeKernel& k, const geom::Manifold& M,
                               const fields::PotentialField& v, double t, const geom::Point& x,
                               int grid_N, double collar_eta = 0.0);

// Zonal residual (d_t + Delta_x) g / e on the sphere, for kernels of the form
// g(t, d). Drives the a0-ansatz gate.
double sphere_zonal_residual(const std::function<double(double, double)>& g, double R, double t,
                             const std::vector<double>& d_grid);

struct HsuReport {
  double min_ratio = 0.0;       // min kDelta/e over the grid
  double min_ratio_refined = 0.0;  // with doubled sampling
  double stability = 0.0;       // |refined/base - 1|
  bool positive = false;
};
HsuReport hsu_check(const geom::Manifold& M, const std::vector<double>& t_grid, int n_pairs,
                    unsigned long long seed);

}  // namespace heatpath::kernels
