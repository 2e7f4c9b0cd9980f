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
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"

namespace heatpath::pathint {
struct Partition;
}

namespace heatpath::bundles {

enum class BundleKind { TrivialLine, TrivialRank2, TangentSphere };

// Hermitian vector bundle with a metric connection and a potential; the
// data of a generalized Laplacian H = nabla*nabla + V over a model manifold.
struct BundleModel {
  BundleKind kind = BundleKind::TrivialLine;
  int rank = 1;
  fields::PotentialField potential;     // hermitian k x k
  fields::ConnectionField connection;   // S1 rank-2 only

  static BundleModel line(const geom::Manifold& M, const std::string& v_name = "zero");
  static BundleModel rank2(const geom::Manifold& M, const std::string& a_name,
                           const std::string& v_name);
  static BundleModel tangent_sphere(const geom::Manifold& M, const std::string& v_name = "zero");
  // "line", "line:<V>", "rank2:<A>:<V>", "tangent-s2", "tangent-s2:<V>"
  static BundleModel parse(const geom::Manifold& M, const std::string& spec);

  bool trivial_connection() const {
    return kind == BundleKind::TrivialLine ||
           (kind == BundleKind::TrivialRank2 && connection.is_zero);
  }
  std::string spec() const;
};

struct TransportMap {
  Eigen::MatrixXcd matrix;
  geom::Point source, target;
  double s = 0.0, t = 1.0;
};

// tau(gamma,nabla)_s^t along the unique shortest geodesic from x to y.
TransportMap parallel_transport(const BundleModel& B, const geom::Manifold& M,
                                const geom::Point& x, const geom::Point& y, double s, double t);

// Transport samples along one geodesic segment, shared by the kernel zoo and
// the ordered exponential: tau(0->u) at the Gauss-Legendre nodes of [0,1].
struct SegmentFrame {
  Eigen::MatrixXcd tau01;                 // tau(0->1): E_x -> E_y
  std::vector<Eigen::MatrixXcd> tau_at;   // tau(0->u_i)
  std::vector<double> u_nodes;            // GL nodes mapped to [0,1]
  std::vector<double> u_weights;          // GL weights on [0,1]
  int rank = 1;
};
SegmentFrame segment_frame(const BundleModel& B, const geom::Manifold& M, const geom::Point& x,
                           const geom::Point& y, int quad_nodes);

// Kernel-sweep variant: closed form for constant connections, fixed-step RK4
// otherwise. Checked against the step-doubling version in the test suite.
SegmentFrame segment_frame_fast(const BundleModel& B, const geom::Manifold& M,
                                const geom::Point& x, const geom::Point& y, int quad_nodes);

using EndoField = std::function<Eigen::MatrixXcd(const geom::Point&)>;

// tau(0->1) o exp( int_0^1 tau_s^0 W(gamma(s)) tau_0^s ds ) over one segment.
Eigen::MatrixXcd segment_exp(const BundleModel& B, const geom::Manifold& M, const geom::Point& x,
                             const geom::Point& y, const EndoField& W, int quad_nodes);

// (P,gamma)-ordered exponential: right-to-left product over segments of
// tau_{s_{j-1}}^{s_j} o exp( int_{s_{j-1}}^{s_j} tau W tau ds ).
Eigen::MatrixXcd ordered_exponential(const BundleModel& B, const geom::Manifold& M,
                                     const pathint::Partition& P,
                                     const std::vector<geom::Point>& vertices, const EndoField& W,
                                     int quad_nodes = 8);

// Commuting-case form tau_0^1 o exp( int_0^1 tau_s^0 W tau_0^s ds ), with all
// inner integrals transported back to gamma(0) before one global exp. Differs
// from the ordered product when the transported W values fail to commute.
Eigen::MatrixXcd unordered_exponential(const BundleModel& B, const geom::Manifold& M,
                                       const pathint::Partition& P,
                                       const std::vector<geom::Point>& vertices, const EndoField& W,
                                       int quad_nodes = 8);

}  // namespace heatpath::bundles
