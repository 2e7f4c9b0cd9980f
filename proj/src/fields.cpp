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
#include "fields.hpp"

#include <cmath>
#include <vector>

#include "common.hpp"

namespace heatpath::fields {

namespace {

std::vector<double> params_after_at(const std::string& name, std::string& head) {
  auto at = name.find('@');
  head = name.substr(0, at);
  std::vector<double> ps;
  if (at == std::string::npos) return ps;
  std::string rest = name.substr(at + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      ps.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("field '" + name + "': bad parameter '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return ps;
}

const Eigen::Matrix2cd& skew_generator() {
  static const Eigen::Matrix2cd J = [] {
    Eigen::Matrix2cd m;
    m << 0.0, -1.0, 1.0, 0.0;
    return m;
  }();
  return J;
}

}  // namespace

double chart_angle(const geom::Manifold& M, const geom::Point& p) {
  switch (M.kind()) {
    case geom::ManifoldKind::Circle: return p.c[0];
    case geom::ManifoldKind::FlatTorus: return 2.0 * M_PI * p.c[0] / M.L1();
    case geom::ManifoldKind::Sphere: return p.c[0];
  }
  return 0.0;
}

PotentialField make_potential(const geom::Manifold& M, int rank, const std::string& name) {
  if (rank != 1 && rank != 2) throw ConfigError("potential fields support rank 1 or 2");
  std::string head;
  auto ps = params_after_at(name, head);
  PotentialField f;
  f.name = name;
  f.rank = rank;
  auto id = Eigen::MatrixXcd::Identity(rank, rank);

  if (head == "zero") {
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(rank, rank);
    f.eval = [z](const geom::Point&) { return z; };
    return f;
  }
  f.is_zero = false;
  if (head == "const") {
    if (ps.size() != 1) throw ConfigError("const potential needs one parameter, e.g. const@0.5");
    Eigen::MatrixXcd v = ps[0] * id;
    f.eval = [v](const geom::Point&) { return v; };
    return f;
  }
  f.is_constant = false;
  if (head == "one") {
    f.is_constant = true;
    Eigen::MatrixXcd v = 1.0 * id;
    f.eval = [v](const geom::Point&) { return v; };
    return f;
  }
  if (head == "cos" || head == "sin") {
    double amp = ps.empty() ? 1.0 : ps[0];
    bool use_cos = head == "cos";
    Eigen::MatrixXcd idc = id;
    f.eval = [M, amp, use_cos, idc](const geom::Point& p) -> Eigen::MatrixXcd {
      double a = chart_angle(M, p);
      return (amp * (use_cos ? std::cos(a) : std::sin(a))) * idc;
    };
    return f;
  }
  if (head == "cosdiag") {
    if (rank != 2) throw ConfigError("cosdiag is a rank-2 potential");
    if (ps.size() != 2) throw ConfigError("cosdiag needs two parameters, e.g. cosdiag@1,0.3");
    double d = ps[0], o = ps[1];
    f.eval = [M, d, o](const geom::Point& p) -> Eigen::MatrixXcd {
      double a = chart_angle(M, p);
      Eigen::MatrixXcd v(2, 2);
      v << d * std::cos(a), o * std::sin(a), o * std::sin(a), -d * std::cos(a);
      return v;
    };
    return f;
  }
  throw ConfigError("unknown potential field '" + name + "'");
}

ConnectionField make_connection(const geom::Manifold& M, const std::string& name) {
  if (M.kind() != geom::ManifoldKind::Circle)
    throw UnsupportedModelError("connection fields are defined over S1 only");
  std::string head;
  auto ps = params_after_at(name, head);
  ConnectionField f;
  f.name = name;
  const double R = M.radius();
  if (head == "zero") {
    f.value = [](double) { return Eigen::Matrix2cd::Zero(); };
    f.arc_deriv = [](double) { return Eigen::Matrix2cd::Zero(); };
    return f;
  }
  f.is_zero = false;
  if (head == "skew") {
    if (ps.size() != 1) throw ConfigError("skew connection needs one parameter, e.g. skew@0.5");
    Eigen::Matrix2cd A = ps[0] * skew_generator();
    f.value = [A](double) { return A; };
    f.arc_deriv = [](double) { return Eigen::Matrix2cd::Zero(); };
    return f;
  }
  if (head == "skewcos") {
    if (ps.size() != 1) throw ConfigError("skewcos connection needs one parameter");
    f.is_constant = false;
    double a = ps[0];
    f.value = [a](double th) { return Eigen::Matrix2cd(a * std::cos(th) * skew_generator()); };
    f.arc_deriv = [a, R](double th) {
      return Eigen::Matrix2cd((-a * std::sin(th) / R) * skew_generator());
    };
    return f;
  }
  throw ConfigError("unknown connection field '" + name + "'");
}

}  // namespace heatpath::fields
