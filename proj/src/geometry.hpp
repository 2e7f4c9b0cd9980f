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
#include <array>
#include <random>
#include <string>
#include <vector>

namespace heatpath::geom {

// Chart coordinates, canonicalized to the fundamental domain:
//   S1:       c[0] = theta in [0, 2pi)
//   T2:       c[0] in [0, L1), c[1] in [0, L2)
//   S2:       c[0] = colatitude in [0, pi], c[1] = longitude in [0, 2pi)
struct Point {
  std::array<double, 2> c{0.0, 0.0};
  Point() = default;
  Point(double a, double b = 0.0) : c{a, b} {}
};

enum class ManifoldKind { Circle, FlatTorus, Sphere };

struct QuadratureGrid;

class Manifold {
public:
  static Manifold circle(double R);
  static Manifold flat_torus(double L1, double L2);
  static Manifold sphere(double R);
  // "s1:R", "t2:L1,L2", "s2:R"
  static Manifold parse(const std::string& spec);

  ManifoldKind kind() const { return kind_; }
  int dim() const;
  double volume() const;
  double injectivity_radius() const;
  double diameter() const;
  double scalar_curvature(const Point& x) const;
  std::string spec() const;

  Point canonical(const Point& p) const;
  double distance(const Point& x, const Point& y) const;
  bool in_cut_locus(const Point& x, const Point& y) const;
  // Constant-speed shortest geodesic, gamma(0)=x, gamma(1)=y. Throws
  // CutLocusError when the pair admits no unique shortest geodesic.
  Point geodesic_point(const Point& x, const Point& y, double s) const;

  Point sample_uniform(std::mt19937_64& rng) const;

  QuadratureGrid quadrature_grid(int N) const;

  // Sphere-only embedding helpers; all S2 geometry runs through unit vectors.
  Eigen::Vector3d embed(const Point& p) const;
  Point chart(const Eigen::Vector3d& v) const;

  double radius() const { return R_; }
  double L1() const { return L1_; }
  double L2() const { return L2_; }

private:
  Manifold(ManifoldKind k, double R, double l1, double l2) : kind_(k), R_(R), L1_(l1), L2_(l2) {}
  ManifoldKind kind_;
  double R_ = 1.0, L1_ = 1.0, L2_ = 1.0;
};

struct QuadratureGrid {
  std::vector<Point> nodes;
  std::vector<double> weights;  // volume units; sums to vol(M)
  int resolution = 0;
  ManifoldKind kind = ManifoldKind::Circle;
  std::string manifold_spec;

  // Sphere grids keep the iso-latitude ring layout for pruned kernel sweeps:
  // ring i holds nodes [i*n_longitudes, (i+1)*n_longitudes).
  int n_rings = 0;
  int n_longitudes = 0;
  std::vector<double> ring_cos;     // cos(colatitude) per ring
  std::vector<double> ring_sin;
  std::vector<double> ring_weight;  // weight per node on this ring

  std::size_t size() const { return nodes.size(); }
};

double wrap_angle(double a);          // into [0, 2pi)
double signed_wrap(double a);         // into (-pi, pi]

}  // namespace heatpath::geom
