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
#include "geometry.hpp"

#include <cmath>
#include <sstream>

#include "common.hpp"
#include "quadrature.hpp"

namespace heatpath::geom {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kCutTol = 1e-12;

double wrap_into(double v, double period) {
  double w = std::fmod(v, period);
  if (w < 0) w += period;
  return w;
}
}  // namespace

double wrap_angle(double a) { return wrap_into(a, kTwoPi); }

double signed_wrap(double a) {
  double w = wrap_into(a + M_PI, kTwoPi) - M_PI;
  // map -pi to +pi so the representative is unique
  if (w <= -M_PI) w = M_PI;
  return w;
}

Manifold Manifold::circle(double R) {
  if (!(R > 0)) throw Error(ErrorCode::InvalidArgument, "circle radius must be > 0");
  return Manifold(ManifoldKind::Circle, R, 0, 0);
}

Manifold Manifold::flat_torus(double L1, double L2) {
  if (!(L1 > 0 && L2 > 0)) throw Error(ErrorCode::InvalidArgument, "torus periods must be > 0");
  return Manifold(ManifoldKind::FlatTorus, 0, L1, L2);
}

Manifold Manifold::sphere(double R) {
  if (!(R > 0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be > 0");
  return Manifold(ManifoldKind::Sphere, R, 0, 0);
}

Manifold Manifold::parse(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("manifold spec must be s1:R, t2:L1,L2 or s2:R");
  std::string head = spec.substr(0, colon), tail = spec.substr(colon + 1);
  try {
    if (head == "s1") return circle(std::stod(tail));
    if (head == "s2") return sphere(std::stod(tail));
    if (head == "t2") {
      auto comma = tail.find(',');
      if (comma == std::string::npos) throw ConfigError("t2 spec needs two periods: t2:L1,L2");
      return flat_torus(std::stod(tail.substr(0, comma)), std::stod(tail.substr(comma + 1)));
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("manifold spec has a malformed number: " + spec);
  }
  throw ConfigError("unknown manifold kind in spec: " + spec);
}

std::string Manifold::spec() const {
  std::ostringstream os;
  switch (kind_) {
    case ManifoldKind::Circle: os << "s1:" << R_; break;
    case ManifoldKind::FlatTorus: os << "t2:" << L1_ << "," << L2_; break;
    case ManifoldKind::Sphere: os << "s2:" << R_; break;
  }
  return os.str();
}

int Manifold::dim() const { return kind_ == ManifoldKind::Circle ? 1 : 2; }

double Manifold::volume() const {
  switch (kind_) {
    case ManifoldKind::Circle: return kTwoPi * R_;
    case ManifoldKind::FlatTorus: return L1_ * L2_;
    case ManifoldKind::Sphere: return 4.0 * M_PI * R_ * R_;
  }
  return 0;
}

double Manifold::injectivity_radius() const {
  switch (kind_) {
    case ManifoldKind::Circle: return M_PI * R_;
    case ManifoldKind::FlatTorus: return 0.5 * std::min(L1_, L2_);
    case ManifoldKind::Sphere: return M_PI * R_;
  }
  return 0;
}

double Manifold::diameter() const {
  switch (kind_) {
    case ManifoldKind::Circle: return M_PI * R_;
    case ManifoldKind::FlatTorus: return 0.5 * std::hypot(L1_, L2_);
    case ManifoldKind::Sphere: return M_PI * R_;
  }
  return 0;
}

double Manifold::scalar_curvature(const Point&) const {
  return kind_ == ManifoldKind::Sphere ? 2.0 / (R_ * R_) : 0.0;
}

Point Manifold::canonical(const Point& p) const {
  switch (kind_) {
    case ManifoldKind::Circle: return Point(wrap_angle(p.c[0]));
    case ManifoldKind::FlatTorus: return Point(wrap_into(p.c[0], L1_), wrap_into(p.c[1], L2_));
    case ManifoldKind::Sphere: {
      // route through the embedding so e.g. theta slightly past pi folds back
      double th = p.c[0], ph = p.c[1];
      if (th >= 0.0 && th <= M_PI) return Point(th, wrap_angle(ph));
      return chart(embed(Point(th, ph)));
    }
  }
  return p;
}

Eigen::Vector3d Manifold::embed(const Point& p) const {
  if (kind_ != ManifoldKind::Sphere)
    throw Error(ErrorCode::InvalidArgument, "embed: sphere-only operation");
  double st = std::sin(p.c[0]), ct = std::cos(p.c[0]);
  return {st * std::cos(p.c[1]), st * std::sin(p.c[1]), ct};
}

Point Manifold::chart(const Eigen::Vector3d& v) const {
  if (kind_ != ManifoldKind::Sphere)
    throw Error(ErrorCode::InvalidArgument, "chart: sphere-only operation");
  Eigen::Vector3d u = v.normalized();
  double th = std::acos(std::clamp(u.z(), -1.0, 1.0));
  double ph = std::atan2(u.y(), u.x());
  if (ph < 0) ph += kTwoPi;
  if (th < 1e-300 || th > M_PI - 1e-300) ph = 0.0;
  return Point(th, ph);
}

double Manifold::distance(const Point& xa, const Point& xb) const {
  Point x = canonical(xa), y = canonical(xb);
  switch (kind_) {
    case ManifoldKind::Circle: {
      double d = std::abs(signed_wrap(y.c[0] - x.c[0]));
      return R_ * d;
    }
    case ManifoldKind::FlatTorus: {
      double d1 = std::abs(y.c[0] - x.c[0]);
      d1 = std::min(d1, L1_ - d1);
      double d2 = std::abs(y.c[1] - x.c[1]);
      d2 = std::min(d2, L2_ - d2);
      return std::hypot(d1, d2);
    }
    case ManifoldKind::Sphere: {
      double dot = std::clamp(embed(x).dot(embed(y)), -1.0, 1.0);
      return R_ * std::acos(dot);
    }
  }
  return 0;
}

bool Manifold::in_cut_locus(const Point& xa, const Point& xb) const {
  Point x = canonical(xa), y = canonical(xb);
  switch (kind_) {
    case ManifoldKind::Circle: {
      double d = std::abs(signed_wrap(y.c[0] - x.c[0]));
      return std::abs(d - M_PI) < kCutTol;
    }
    case ManifoldKind::FlatTorus: {
      double d1 = std::abs(y.c[0] - x.c[0]);
      d1 = std::min(d1, L1_ - d1);
      double d2 = std::abs(y.c[1] - x.c[1]);
      d2 = std::min(d2, L2_ - d2);
      return std::abs(d1 - 0.5 * L1_) < kCutTol || std::abs(d2 - 0.5 * L2_) < kCutTol;
    }
    case ManifoldKind::Sphere: {
      double dot = embed(x).dot(embed(y));
      return std::acos(std::clamp(dot, -1.0, 1.0)) > M_PI - kCutTol;
    }
  }
  return false;
}

Point Manifold::geodesic_point(const Point& xa, const Point& xb, double s) const {
  Point x = canonical(xa), y = canonical(xb);
  if (in_cut_locus(x, y)) {
    std::ostringstream os;
    os << "geodesic_point: (" << x.c[0] << "," << x.c[1] << ") and (" << y.c[0] << "," << y.c[1]
       << ") are cut points on " << spec();
    throw CutLocusError(os.str());
  }
  switch (kind_) {
    case ManifoldKind::Circle: {
      double d = signed_wrap(y.c[0] - x.c[0]);
      return Point(wrap_angle(x.c[0] + s * d));
    }
    case ManifoldKind::FlatTorus: {
      double d1 = y.c[0] - x.c[0];
      if (d1 > 0.5 * L1_) d1 -= L1_;
      if (d1 < -0.5 * L1_) d1 += L1_;
      double d2 = y.c[1] - x.c[1];
      if (d2 > 0.5 * L2_) d2 -= L2_;
      if (d2 < -0.5 * L2_) d2 += L2_;
      return Point(wrap_into(x.c[0] + s * d1, L1_), wrap_into(x.c[1] + s * d2, L2_));
    }
    case ManifoldKind::Sphere: {
      Eigen::Vector3d u = embed(x), v = embed(y);
      double ang = std::acos(std::clamp(u.dot(v), -1.0, 1.0));
      if (ang < 1e-14) return x;
      Eigen::Vector3d w = (std::sin((1.0 - s) * ang) * u + std::sin(s * ang) * v) / std::sin(ang);
      return chart(w);
    }
  }
  return x;
}

Point Manifold::sample_uniform(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  switch (kind_) {
    case ManifoldKind::Circle: return Point(kTwoPi * uni(rng));
    case ManifoldKind::FlatTorus: return Point(L1_ * uni(rng), L2_ * uni(rng));
    case ManifoldKind::Sphere: {
      double z = 1.0 - 2.0 * uni(rng);
      double ph = kTwoPi * uni(rng);
      return Point(std::acos(std::clamp(z, -1.0, 1.0)), ph);
    }
  }
  return Point();
}

QuadratureGrid Manifold::quadrature_grid(int N) const {
  if (N < 4) throw Error(ErrorCode::InvalidArgument, "quadrature_grid: N must be >= 4");
  QuadratureGrid g;
  g.resolution = N;
  g.kind = kind_;
  g.manifold_spec = spec();
  switch (kind_) {
    case ManifoldKind::Circle: {
      g.nodes.reserve(N);
      double w = kTwoPi * R_ / N;
      for (int i = 0; i < N; ++i) {
        g.nodes.emplace_back(kTwoPi * i / N);
        g.weights.push_back(w);
      }
      break;
    }
    case ManifoldKind::FlatTorus: {
      g.nodes.reserve(static_cast<std::size_t>(N) * N);
      double w = (L1_ / N) * (L2_ / N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          g.nodes.emplace_back(L1_ * i / N, L2_ * j / N);
          g.weights.push_back(w);
        }
      break;
    }
    case ManifoldKind::Sphere: {
      const auto& rule = heatpath::quad::gauss_legendre(N);
      g.n_rings = N;
      g.n_longitudes = 2 * N;
      double wphi = M_PI / N;  // 2pi / (2N)
      g.nodes.reserve(static_cast<std::size_t>(N) * 2 * N);
      for (int i = 0; i < N; ++i) {
        double u = rule.nodes[N - 1 - i];  // decreasing colatitude ordering: u from +1 side
        double th = std::acos(std::clamp(u, -1.0, 1.0));
        double wnode = rule.weights[N - 1 - i] * wphi * R_ * R_;
        g.ring_cos.push_back(std::cos(th));
        g.ring_sin.push_back(std::sin(th));
        g.ring_weight.push_back(wnode);
        for (int j = 0; j < 2 * N; ++j) {
          g.nodes.emplace_back(th, wphi * j);
          g.weights.push_back(wnode);
        }
      }
      break;
    }
  }
  return g;
}

}  // namespace heatpath::geom
