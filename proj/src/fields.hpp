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
#include <string>

#include "geometry.hpp"

namespace heatpath::fields {

// Built-in smooth field registry. Profiles are taken in the first chart
// coordinate mapped to an angle: theta on S1, 2*pi*x1/L1 on T2, the
// colatitude on S2.
//
// Hermitian potentials:
//   rank 1: zero | const@c | cos | sin | cos@amp
//   rank 2: zero | const@c | cosdiag@d,o   ([[d cos, o sin],[o sin, -d cos]])
// Connection coefficients (2x2 skew-hermitian, per unit length, S1 only):
//   zero | skew@a | skewcos@a              (a J resp. a cos(theta) J)

struct PotentialField {
  std::string name = "zero";
  int rank = 1;
  bool is_zero = true;
  bool is_constant = true;  // value independent of the point
  std::function<Eigen::MatrixXcd(const geom::Point&)> eval;

  Eigen::MatrixXcd operator()(const geom::Point& p) const { return eval(p); }
};

struct ConnectionField {
  std::string name = "zero";
  bool is_zero = true;
  bool is_constant = true;
  std::function<Eigen::Matrix2cd(double theta)> value;      // per unit length
  std::function<Eigen::Matrix2cd(double theta)> arc_deriv;  // d/ds of value
};

PotentialField make_potential(const geom::Manifold& M, int rank, const std::string& name);
ConnectionField make_connection(const geom::Manifold& M, const std::string& name);

// Angle profile used by the scalar registry entries.
double chart_angle(const geom::Manifold& M, const geom::Point& p);

}  // namespace heatpath::fields
