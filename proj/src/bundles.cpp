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
#include "bundles.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "common.hpp"
#include "pathint.hpp"
#include "quadrature.hpp"

namespace heatpath::bundles {

namespace {

// Orthonormal tangent frame at a point of S2, built from the embedded normal.
// Fixed once so transport matrices are reproducible.
void sphere_frame(const Eigen::Vector3d& p, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  Eigen::Vector3d z(0, 0, 1);
  Eigen::Vector3d c = z.cross(p);
  if (c.norm() < 1e-6) {
    c = Eigen::Vector3d(1, 0, 0).cross(p);
  }
  e1 = c.normalized();
  e2 = p.cross(e1);
}

Eigen::Matrix2d sphere_transport_closed(const geom::Manifold& M, const geom::Point& xp,
                                        const geom::Point& yp, double s, double t) {
  Eigen::Vector3d x = M.embed(xp), y = M.embed(yp);
  double ang = std::acos(std::clamp(x.dot(y), -1.0, 1.0));
  if (ang < 1e-14) return Eigen::Matrix2d::Identity();
  Eigen::Vector3d axis = x.cross(y).normalized();
  auto point_at = [&](double u) {
    return Eigen::Vector3d(((std::sin((1.0 - u) * ang) * x + std::sin(u * ang) * y) / std::sin(ang)));
  };
  Eigen::Vector3d ps = point_at(s), pt = point_at(t);
  Eigen::Matrix3d rot(Eigen::AngleAxisd((t - s) * ang, axis));
  Eigen::Vector3d a1, a2, b1, b2;
  sphere_frame(ps, a1, a2);
  sphere_frame(pt, b1, b2);
  Eigen::Matrix<double, 3, 2> Fs, Ft;
  Fs.col(0) = a1;
  Fs.col(1) = a2;
  Ft.col(0) = b1;
  Ft.col(1) = b2;
  return Ft.transpose() * rot * Fs;
}

}  // namespace

BundleModel BundleModel::line(const geom::Manifold& M, const std::string& v_name) {
  BundleModel b;
  b.kind = BundleKind::TrivialLine;
  b.rank = 1;
  b.potential = fields::make_potential(M, 1, v_name);
  b.connection.name = "zero";
  return b;
}

BundleModel BundleModel::rank2(const geom::Manifold& M, const std::string& a_name,
                               const std::string& v_name) {
  if (M.kind() != geom::ManifoldKind::Circle)
    throw UnsupportedModelError("rank2 bundles are defined over S1");
  BundleModel b;
  b.kind = BundleKind::TrivialRank2;
  b.rank = 2;
  b.connection = fields::make_connection(M, a_name);
  b.potential = fields::make_potential(M, 2, v_name);
  return b;
}

BundleModel BundleModel::tangent_sphere(const geom::Manifold& M, const std::string& v_name) {
  if (M.kind() != geom::ManifoldKind::Sphere)
    throw UnsupportedModelError("the tangent bundle model lives over S2");
  BundleModel b;
  b.kind = BundleKind::TangentSphere;
  b.rank = 2;
  b.potential = fields::make_potential(M, 2, v_name);
  b.connection.name = "zero";
  return b;
}

BundleModel BundleModel::parse(const geom::Manifold& M, const std::string& spec) {
  auto next = [](const std::string& s, std::size_t& pos) {
    auto c = s.find(':', pos);
    std::string tok = s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    pos = c == std::string::npos ? s.size() : c + 1;
    return tok;
  };
  std::size_t pos = 0;
  std::string head = next(spec, pos);
  if (head == "line") {
    std::string v = pos < spec.size() ? spec.substr(pos) : "zero";
    return line(M, v);
  }
  if (head == "rank2") {
    std::string a = next(spec, pos);
    std::string v = pos < spec.size() ? spec.substr(pos) : "zero";
    if (a.empty()) throw ConfigError("rank2 bundle spec: rank2:<A-field>:<V-field>");
    return rank2(M, a, v);
  }
  if (head == "tangent-s2") {
    std::string v = pos < spec.size() ? spec.substr(pos) : "zero";
    return tangent_sphere(M, v);
  }
  throw ConfigError("unknown bundle spec '" + spec + "'");
}

std::string BundleModel::spec() const {
  switch (kind) {
    case BundleKind::TrivialLine: return "line:" + potential.name;
    case BundleKind::TrivialRank2: return "rank2:" + connection.name + ":" + potential.name;
    case BundleKind::TangentSphere: return "tangent-s2:" + potential.name;
  }
  return "line";
}

TransportMap parallel_transport(const BundleModel& B, const geom::Manifold& M,
                                const geom::Point& x, const geom::Point& y, double s, double t) {
  if (s < 0 || s > 1 || t < 0 || t > 1)
    throw Error(ErrorCode::InvalidArgument, "parallel_transport: s,t must lie in [0,1]");
  TransportMap out;
  out.s = s;
  out.t = t;
  out.source = M.geodesic_point(x, y, s);  // throws on cut pairs
  out.target = M.geodesic_point(x, y, t);

  switch (B.kind) {
    case BundleKind::TrivialLine:
      out.matrix = Eigen::MatrixXcd::Identity(1, 1);
      return out;
    case BundleKind::TangentSphere: {
      Eigen::Matrix2d m = sphere_transport_closed(M, x, y, s, t);
      out.matrix = m.cast<std::complex<double>>();
      return out;
    }
    case BundleKind::TrivialRank2: {
      if (B.connection.is_zero) {
        out.matrix = Eigen::MatrixXcd::Identity(2, 2);
        return out;
      }
      double theta0 = M.canonical(x).c[0];
      double dtheta = geom::signed_wrap(M.canonical(y).c[0] - theta0);
      double arc = M.radius() * dtheta;  // signed dl/du along the segment
      auto rhs = [&](double u, const Eigen::Matrix2cd& tau) {
        return Eigen::Matrix2cd(-B.connection.value(theta0 + u * dtheta) * arc * tau);
      };
      auto advance = [&](Eigen::Matrix2cd tau, double a, double b, int steps) {
        double h = (b - a) / steps;
        for (int i = 0; i < steps; ++i) {
          double u = a + i * h;
          Eigen::Matrix2cd k1 = rhs(u, tau);
          Eigen::Matrix2cd k2 = rhs(u + 0.5 * h, tau + (0.5 * h) * k1);
          Eigen::Matrix2cd k3 = rhs(u + 0.5 * h, tau + (0.5 * h) * k2);
          Eigen::Matrix2cd k4 = rhs(u + h, tau + h * k3);
          tau += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return tau;
      };
      int steps = 16;
      Eigen::Matrix2cd coarse = advance(Eigen::Matrix2cd::Identity(), s, t, steps);
      for (; steps <= 4096; steps *= 2) {
        Eigen::Matrix2cd fine = advance(Eigen::Matrix2cd::Identity(), s, t, steps * 2);
        if ((fine - coarse).norm() < 1e-10) {
          coarse = fine;
          break;
        }
        coarse = fine;
      }
      out.matrix = coarse;
      return out;
    }
  }
  throw Error(ErrorCode::Internal, "parallel_transport: unreachable");
}

SegmentFrame segment_frame(const BundleModel& B, const geom::Manifold& M, const geom::Point& x,
                           const geom::Point& y, int quad_nodes) {
  SegmentFrame f;
  f.rank = B.rank;
  const auto& rule = quad::gauss_legendre(quad_nodes);
  f.u_nodes.resize(quad_nodes);
  f.u_weights.resize(quad_nodes);
  for (int i = 0; i < quad_nodes; ++i) {
    f.u_nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
    f.u_weights[i] = 0.5 * rule.weights[i];
  }

  if (B.trivial_connection()) {
    f.tau01 = Eigen::MatrixXcd::Identity(B.rank, B.rank);
    f.tau_at.assign(quad_nodes, f.tau01);
    // still validate the pair
    (void)M.geodesic_point(x, y, 0.5);
    return f;
  }
  if (B.kind == BundleKind::TangentSphere) {
    f.tau01 = sphere_transport_closed(M, x, y, 0.0, 1.0).cast<std::complex<double>>();
    f.tau_at.resize(quad_nodes);
    for (int i = 0; i < quad_nodes; ++i)
      f.tau_at[i] = sphere_transport_closed(M, x, y, 0.0, f.u_nodes[i]).cast<std::complex<double>>();
    return f;
  }

  // rank-2 over S1 with a nontrivial connection: one sweep, sampled at nodes
  double theta0 = M.canonical(x).c[0];
  double dtheta = geom::signed_wrap(M.canonical(y).c[0] - theta0);
  if (M.in_cut_locus(x, y)) throw CutLocusError("segment_frame: cut pair on S1");
  double arc = M.radius() * dtheta;
  auto rhs = [&](double u, const Eigen::Matrix2cd& tau) {
    return Eigen::Matrix2cd(-B.connection.value(theta0 + u * dtheta) * arc * tau);
  };
  auto sweep = [&](int steps_per_unit, std::vector<Eigen::Matrix2cd>& at, Eigen::Matrix2cd& end) {
    Eigen::Matrix2cd tau = Eigen::Matrix2cd::Identity();
    double u = 0.0;
    at.resize(quad_nodes);
    auto advance_to = [&](double target) {
      int steps = std::max(1, (int)std::ceil((target - u) * steps_per_unit));
      double h = (target - u) / steps;
      for (int i = 0; i < steps; ++i) {
        double uu = u + i * h;
        Eigen::Matrix2cd k1 = rhs(uu, tau);
        Eigen::Matrix2cd k2 = rhs(uu + 0.5 * h, tau + (0.5 * h) * k1);
        Eigen::Matrix2cd k3 = rhs(uu + 0.5 * h, tau + (0.5 * h) * k2);
        Eigen::Matrix2cd k4 = rhs(uu + h, tau + h * k3);
        tau += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      u = target;
    };
    for (int i = 0; i < quad_nodes; ++i) {
      advance_to(f.u_nodes[i]);
      at[i] = tau;
    }
    advance_to(1.0);
    end = tau;
  };
  std::vector<Eigen::Matrix2cd> at_c, at_f;
  Eigen::Matrix2cd end_c, end_f;
  int steps = 32;
  sweep(steps, at_c, end_c);
  for (; steps <= 4096; steps *= 2) {
    sweep(steps * 2, at_f, end_f);
    if ((end_f - end_c).norm() < 1e-10) {
      at_c = at_f;
      end_c = end_f;
      break;
    }
    at_c = at_f;
    end_c = end_f;
  }
  f.tau01 = end_c;
  f.tau_at.resize(quad_nodes);
  for (int i = 0; i < quad_nodes; ++i) f.tau_at[i] = at_c[i];
  return f;
}

SegmentFrame segment_frame_fast(const BundleModel& B, const geom::Manifold& M,
                                const geom::Point& x, const geom::Point& y, int quad_nodes) {
  if (B.trivial_connection() || B.kind == BundleKind::TangentSphere)
    return segment_frame(B, M, x, y, quad_nodes);

  SegmentFrame f;
  f.rank = B.rank;
  const auto& rule = quad::gauss_legendre(quad_nodes);
  f.u_nodes.resize(quad_nodes);
  f.u_weights.resize(quad_nodes);
  for (int i = 0; i < quad_nodes; ++i) {
    f.u_nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
    f.u_weights[i] = 0.5 * rule.weights[i];
  }
  double theta0 = M.canonical(x).c[0];
  double dtheta = geom::signed_wrap(M.canonical(y).c[0] - theta0);
  if (M.in_cut_locus(x, y)) throw CutLocusError("segment_frame_fast: cut pair on S1");
  double arc = M.radius() * dtheta;

  if (B.connection.is_constant) {
    // tau(0->u) = exp(-A arc u); A skew-hermitian, so iB is hermitian and the
    // diagonalization is unitary.
    Eigen::Matrix2cd Bm = -B.connection.value(theta0) * arc;
    Eigen::Matrix2cd H = std::complex<double>(0, 1) * Bm;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
    Eigen::Vector2d lam = es.eigenvalues();
    Eigen::Matrix2cd V = es.eigenvectors();
    auto expo = [&](double u) {
      Eigen::Vector2cd d;
      d << std::exp(std::complex<double>(0, -lam(0) * u)), std::exp(std::complex<double>(0, -lam(1) * u));
      return Eigen::Matrix2cd(V * d.asDiagonal() * V.adjoint());
    };
    f.tau_at.resize(quad_nodes);
    for (int i = 0; i < quad_nodes; ++i) f.tau_at[i] = expo(f.u_nodes[i]);
    f.tau01 = expo(1.0);
    return f;
  }

  // fixed-step RK4, resolution set by the winding of the segment
  auto rhs = [&](double u, const Eigen::Matrix2cd& tau) {
    return Eigen::Matrix2cd(-B.connection.value(theta0 + u * dtheta) * arc * tau);
  };
  const int nst = std::max(128, (int)std::ceil(96.0 * std::abs(arc)));
  Eigen::Matrix2cd tau = Eigen::Matrix2cd::Identity();
  double u = 0.0;
  f.tau_at.resize(quad_nodes);
  int next = 0;
  auto advance_to = [&](double target) {
    int steps = std::max(1, (int)std::ceil((target - u) * nst));
    double h = (target - u) / steps;
    for (int i = 0; i < steps; ++i) {
      double uu = u + i * h;
      Eigen::Matrix2cd k1 = rhs(uu, tau);
      Eigen::Matrix2cd k2 = rhs(uu + 0.5 * h, tau + (0.5 * h) * k1);
      Eigen::Matrix2cd k3 = rhs(uu + 0.5 * h, tau + (0.5 * h) * k2);
      Eigen::Matrix2cd k4 = rhs(uu + h, tau + h * k3);
      tau += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u = target;
  };
  for (; next < quad_nodes; ++next) {
    advance_to(f.u_nodes[next]);
    f.tau_at[next] = tau;
  }
  advance_to(1.0);
  f.tau01 = tau;
  return f;
}

namespace {

// int_0^1 tau_u^0 W(gamma(u)) tau_0^u du in the fiber over gamma(0), with the
// node count doubled until the integral is stable.
Eigen::MatrixXcd transported_integral(const BundleModel& B, const geom::Manifold& M,
                                      const geom::Point& x, const geom::Point& y,
                                      const bundles::EndoField& W, int quad_nodes,
                                      Eigen::MatrixXcd* tau01_out) {
  auto compute = [&](int n) {
    SegmentFrame fr = segment_frame(B, M, x, y, n);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(B.rank, B.rank);
    for (int i = 0; i < n; ++i) {
      geom::Point g = M.geodesic_point(x, y, fr.u_nodes[i]);
      // metric connection: tau_u^0 = (tau_0^u)^dagger
      Eigen::MatrixXcd tdag = fr.tau_at[i].adjoint();
      acc += fr.u_weights[i] * (tdag * W(g) * fr.tau_at[i]);
    }
    if (tau01_out) *tau01_out = fr.tau01;
    return acc;
  };
  Eigen::MatrixXcd coarse = compute(quad_nodes);
  for (int n = 2 * quad_nodes; n <= 128; n *= 2) {
    Eigen::MatrixXcd fine = compute(n);
    if ((fine - coarse).norm() < 1e-11) return fine;
    coarse = fine;
  }
  return coarse;
}

}  // namespace

Eigen::MatrixXcd segment_exp(const BundleModel& B, const geom::Manifold& M, const geom::Point& x,
                             const geom::Point& y, const EndoField& W, int quad_nodes) {
  Eigen::MatrixXcd tau01;
  Eigen::MatrixXcd I = transported_integral(B, M, x, y, W, quad_nodes, &tau01);
  Eigen::MatrixXcd ex = I.exp();
  return tau01 * ex;
}

Eigen::MatrixXcd ordered_exponential(const BundleModel& B, const geom::Manifold& M,
                                     const pathint::Partition& P,
                                     const std::vector<geom::Point>& vertices, const EndoField& W,
                                     int quad_nodes) {
  const int r = P.segments();
  if (static_cast<int>(vertices.size()) != r + 1)
    throw Error(ErrorCode::InvalidArgument, "ordered_exponential: vertex count must be r+1");
  Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(B.rank, B.rank);
  for (int j = 1; j <= r; ++j) {
    double ds = P.s[j] - P.s[j - 1];
    try {
      Eigen::MatrixXcd tau01;
      Eigen::MatrixXcd I =
          transported_integral(B, M, vertices[j - 1], vertices[j], W, quad_nodes, &tau01);
      Eigen::MatrixXcd ex = Eigen::MatrixXcd(ds * I).exp();
      prod = (tau01 * ex) * prod;
    } catch (const CutLocusError& e) {
      throw CutLocusError(std::string(e.what()) + " (segment " + std::to_string(j) + ")");
    }
  }
  return prod;
}

Eigen::MatrixXcd unordered_exponential(const BundleModel& B, const geom::Manifold& M,
                                       const pathint::Partition& P,
                                       const std::vector<geom::Point>& vertices, const EndoField& W,
                                       int quad_nodes) {
  const int r = P.segments();
  if (static_cast<int>(vertices.size()) != r + 1)
    throw Error(ErrorCode::InvalidArgument, "unordered_exponential: vertex count must be r+1");
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(B.rank, B.rank);
  Eigen::MatrixXcd cum = Eigen::MatrixXcd::Identity(B.rank, B.rank);  // tau(0 -> s_{j-1})
  for (int j = 1; j <= r; ++j) {
    double ds = P.s[j] - P.s[j - 1];
    Eigen::MatrixXcd tau01;
    Eigen::MatrixXcd I =
        transported_integral(B, M, vertices[j - 1], vertices[j], W, quad_nodes, &tau01);
    total += cum.adjoint() * (ds * I) * cum;
    cum = tau01 * cum;  // tau(0 -> s_j) along the polygon
  }
  Eigen::MatrixXcd ex = total.exp();
  return cum * ex;
}

}  // namespace heatpath::bundles
