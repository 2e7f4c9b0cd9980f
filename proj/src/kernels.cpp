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
#include "kernels.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <mutex>
#include <sstream>

#include "common.hpp"
#include "quadrature.hpp"

namespace heatpath::kernels {

namespace {
constexpr double kTiny = 1e-300;

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  return m.jacobiSvd().singularValues()(0);
}
}  // namespace

double CutoffProfile::chi(double d) const {
  double u = (d - eta) / eta;
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  double pa = std::exp(-1.0 / u);
  double pb = std::exp(-1.0 / (1.0 - u));
  return pb / (pa + pb);
}

CutoffProfile CutoffProfile::defaults(const geom::Manifold& M) {
  CutoffProfile p;
  p.eta = std::min(M.injectivity_radius(), 1.0) / 4.0;
  return p;
}

double gauss_e(int dim, double t, double d) {
  if (!(t > 0)) throw DomainError("gauss_e: t must be > 0");
  return std::pow(4.0 * M_PI * t, -0.5 * dim) * std::exp(-d * d / (4.0 * t));
}

TimeKernel gauss_kernel(const geom::Manifold& M) {
  TimeKernel k;
  k.name = "gauss";
  k.manifold_spec = M.spec();
  k.rank = 1;
  k.zonal = true;
  const int m = M.dim();
  k.zonal_eval = [m](double t, double d) { return gauss_e(m, t, d); };
  k.eval = [M, m](double t, const geom::Point& x, const geom::Point& y, std::complex<double>* out) {
    out[0] = gauss_e(m, t, M.distance(x, y));
  };
  return k;
}

TimeKernel gauss_chi_kernel(const geom::Manifold& M, const CutoffProfile& profile) {
  TimeKernel k;
  k.name = "gauss*chi";
  k.manifold_spec = M.spec();
  k.rank = 1;
  k.zonal = true;
  k.support_radius = profile.support();
  const int m = M.dim();
  k.zonal_eval = [m, profile](double t, double d) {
    double c = profile.chi(d);
    return c == 0.0 ? 0.0 : c * gauss_e(m, t, d);
  };
  k.eval = [M, m, profile](double t, const geom::Point& x, const geom::Point& y,
                           std::complex<double>* out) {
    double d = M.distance(x, y);
    double c = profile.chi(d);
    out[0] = c == 0.0 ? 0.0 : c * gauss_e(m, t, d);
  };
  return k;
}

double a0_scalar(const geom::Manifold& M, double d) {
  if (M.kind() != geom::ManifoldKind::Sphere) return 1.0;
  double theta = d / M.radius();
  if (theta < 1e-8) return 1.0 + theta * theta / 12.0;
  if (theta >= M_PI) throw DomainError("a0_scalar: antipodal pair");
  return std::sqrt(theta / std::sin(theta));
}

Eigen::MatrixXcd a1_diag(const bundles::BundleModel& B, const geom::Manifold& M,
                         const geom::Point& x) {
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(B.rank, B.rank);
  return (M.scalar_curvature(x) / 6.0) * id - B.potential(x);
}

namespace {

// -t * int_0^1 V(gamma(u)) du for trivial connections (flat a1 ansatz).
Eigen::MatrixXcd potential_average(const bundles::BundleModel& B, const geom::Manifold& M,
                                   const geom::Point& x, const geom::Point& y, int nodes) {
  if (B.potential.is_zero) return Eigen::MatrixXcd::Zero(B.rank, B.rank);
  if (B.potential.is_constant) return B.potential(x);
  const auto& rule = quad::gauss_legendre(nodes);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(B.rank, B.rank);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double u = 0.5 * (rule.nodes[i] + 1.0);
    acc += (0.5 * rule.weights[i]) * B.potential(M.geodesic_point(x, y, u));
  }
  return acc;
}

double scal_average(const geom::Manifold& M, const geom::Point& x) {
  // constant on every model manifold
  return M.scalar_curvature(x);
}

// tau_u^1 V tau_1^u integrated over the segment, in the fiber over y, plus
// tau(1->0). Fixed quadrature tuned for the smooth registry fields.
struct SegmentV {
  Eigen::MatrixXcd tau10;
  Eigen::MatrixXcd integral_y;  // int_0^1 tau_u^1 V(gamma(u)) tau_1^u du
};

SegmentV segment_potential(const bundles::BundleModel& B, const geom::Manifold& M,
                           const geom::Point& x, const geom::Point& y) {
  SegmentV out;
  const int k = B.rank;
  if (B.trivial_connection()) {
    out.tau10 = Eigen::MatrixXcd::Identity(k, k);
    out.integral_y = B.potential.is_zero ? Eigen::MatrixXcd::Zero(k, k)
                                         : potential_average(B, M, x, y, 12);
    return out;
  }
  bundles::SegmentFrame fr = bundles::segment_frame_fast(B, M, x, y, 12);
  out.tau10 = fr.tau01.adjoint();  // metric connection: inverse = adjoint
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(k, k);
  if (!B.potential.is_zero) {
    for (std::size_t i = 0; i < fr.u_nodes.size(); ++i) {
      geom::Point g = M.geodesic_point(x, y, fr.u_nodes[i]);
      Eigen::MatrixXcd Ix = fr.tau_at[i].adjoint() * B.potential(g) * fr.tau_at[i];
      acc += fr.u_weights[i] * Ix;
    }
    // move from the fiber over x to the fiber over y
    acc = fr.tau01 * acc * fr.tau01.adjoint();
  }
  out.integral_y = acc;
  return out;
}

}  // namespace

TimeKernel k_modified(int level, const bundles::BundleModel& B, const geom::Manifold& M,
                      const CutoffProfile& profile) {
  if (level < 1 || level > 4)
    throw Error(ErrorCode::InvalidArgument, "k_modified: level must be 1..4");
  if (2.0 * profile.eta >= M.injectivity_radius())
    throw DomainError("k_modified: 2*eta must stay below the injectivity radius");
  const bool flat = M.kind() != geom::ManifoldKind::Sphere;
  if (level <= 2) {
    if (!flat)
      throw UnsupportedModelError("k1/k2 need the off-diagonal a1 ansatz, available on flat models only");
    if (!B.trivial_connection())
      throw UnsupportedModelError("k1/k2 are implemented for trivial connections only");
  }

  TimeKernel k;
  k.name = "k" + std::to_string(level);
  k.manifold_spec = M.spec();
  k.rank = B.rank;
  k.support_radius = profile.support();
  k.is_real = B.rank == 1;
  k.zonal = B.rank == 1 && B.potential.is_constant;
  const int m = M.dim();
  const double scal = scal_average(M, geom::Point());
  const bundles::BundleModel bundle = B;
  const geom::Manifold man = M;

  if (k.zonal) {
    double c0 = bundle.potential.is_zero ? 0.0 : bundle.potential(geom::Point())(0, 0).real();
    k.zonal_eval = [level, m, profile, scal, c0, man](double t, double d) -> double {
      double c = profile.chi(d);
      if (c == 0.0) return 0.0;
      double e = gauss_e(m, t, d);
      switch (level) {
        case 1: return c * e * (1.0 - t * c0);
        case 2: return c * e * std::exp(-t * c0);
        case 3: return c * e * a0_scalar(man, d) * std::exp(t * (scal / 6.0 - c0));
        default: return c * e * std::exp(t * (scal / 3.0 - c0));
      }
    };
    auto ze = k.zonal_eval;
    k.eval = [man, ze](double t, const geom::Point& x, const geom::Point& y,
                       std::complex<double>* out) { out[0] = ze(t, man.distance(x, y)); };
    return k;
  }

  k.eval = [level, m, profile, scal, bundle, man](double t, const geom::Point& x,
                                                  const geom::Point& y,
                                                  std::complex<double>* out) {
    const int kk = bundle.rank;
    Eigen::Map<Eigen::MatrixXcd> res(out, kk, kk);
    double d = man.distance(x, y);
    double c = profile.chi(d);
    if (c == 0.0) {
      res.setZero();
      return;
    }
    double e = gauss_e(m, t, d);
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(kk, kk);
    if (level <= 2) {
      Eigen::MatrixXcd a1 = -potential_average(bundle, man, x, y, 12);
      if (level == 1) {
        res = (c * e) * (id + t * a1);
      } else {
        Eigen::MatrixXcd ex = Eigen::MatrixXcd(t * a1).exp();
        res = (c * e) * ex;
      }
      return;
    }
    SegmentV sv = segment_potential(bundle, man, x, y);
    if (level == 3) {
      Eigen::MatrixXcd arg = t * ((scal / 6.0) * id - sv.integral_y);
      Eigen::MatrixXcd ex = arg.exp();
      res = (c * e * a0_scalar(man, d)) * (sv.tau10 * ex);
    } else {
      Eigen::MatrixXcd arg = (-t) * sv.integral_y;
      Eigen::MatrixXcd ex = arg.exp();
      res = (c * e * std::exp(t * scal / 3.0)) * (sv.tau10 * ex);
    }
  };
  return k;
}

namespace {

double circle_sum(double circumference, double t, double delta, double tail_tol) {
  // (1/L) [1 + 2 sum e^{-(2 pi n / L)^2 t} cos(2 pi n delta / L)]
  const double L = circumference;
  const double w = 2.0 * M_PI / L;
  double acc = 1.0;
  int n = 1;
  for (; n < 3000000; ++n) {
    double lam = w * n;
    double term = 2.0 * std::exp(-lam * lam * t);
    acc += term * std::cos(2.0 * M_PI * n * delta / L);
    if (term < tail_tol * 0.1) {
      // geometric majorant on the remainder
      double rho = std::exp(-(2.0 * n + 1.0) * w * w * t);
      if (term * rho / std::max(1e-16, 1.0 - rho) < tail_tol) break;
    }
  }
  if (n >= 3000000) {
    std::ostringstream os;
    os << "spectral_heat_kernel: circle sum needs more than 3e6 modes at t=" << t
       << "; required modes ~ " << (int)std::ceil(std::sqrt(std::log(1.0 / tail_tol) / t) / w);
    throw TruncationError(os.str());
  }
  return acc / L;
}

double sphere_sum(double R, double t, double theta, double tail_tol) {
  const double ct = std::cos(theta);
  double acc = 0.0;
  double Pm2 = 1.0, Pm1 = ct;
  const double ts = t / (R * R);
  int l = 0;
  for (; l < 200000; ++l) {
    double P;
    if (l == 0)
      P = 1.0;
    else if (l == 1)
      P = ct;
    else {
      P = ((2.0 * l - 1.0) * ct * Pm1 - (l - 1.0) * Pm2) / l;
      Pm2 = Pm1;
      Pm1 = P;
    }
    double term = (2.0 * l + 1.0) / (4.0 * M_PI) * std::exp(-l * (l + 1.0) * ts);
    acc += term * P;
    if (l >= 2) {
      double next = (2.0 * l + 3.0) / (4.0 * M_PI) * std::exp(-(l + 1.0) * (l + 2.0) * ts);
      double rho = std::exp(-2.0 * (l + 2.0) * ts) * (2.0 * l + 5.0) / (2.0 * l + 3.0);
      if (rho < 1.0 && next / (1.0 - rho) < tail_tol) break;
    }
  }
  if (l >= 200000) {
    std::ostringstream os;
    os << "spectral_heat_kernel: sphere sum needs more than 2e5 degrees at t=" << t
       << "; required L ~ " << (int)std::ceil(R * std::sqrt(std::log(1.0 / tail_tol) / t));
    throw TruncationError(os.str());
  }
  return acc / (R * R);
}

}  // namespace

double spectral_heat_kernel(const geom::Manifold& M, double c_shift, double t,
                            const geom::Point& x, const geom::Point& y, double tail_tol) {
  if (!(t > 0)) throw DomainError("spectral_heat_kernel: t must be > 0");
  double shift = std::exp(-c_shift * t);
  switch (M.kind()) {
    case geom::ManifoldKind::Circle: {
      double delta = M.distance(x, y);  // arc length
      return shift * circle_sum(2.0 * M_PI * M.radius(), t, delta, tail_tol);
    }
    case geom::ManifoldKind::FlatTorus: {
      geom::Point cx = M.canonical(x), cy = M.canonical(y);
      double d1 = std::abs(cx.c[0] - cy.c[0]);
      d1 = std::min(d1, M.L1() - d1);
      double d2 = std::abs(cx.c[1] - cy.c[1]);
      d2 = std::min(d2, M.L2() - d2);
      return shift * circle_sum(M.L1(), t, d1, tail_tol) * circle_sum(M.L2(), t, d2, tail_tol);
    }
    case geom::ManifoldKind::Sphere: {
      double theta = M.distance(x, y) / M.radius();
      return shift * sphere_sum(M.radius(), t, theta, tail_tol);
    }
  }
  throw Error(ErrorCode::Internal, "spectral_heat_kernel: unreachable");
}

TimeKernel spectral_kernel(const geom::Manifold& M, double c_shift, double tail_tol) {
  TimeKernel k;
  k.name = c_shift == 0.0 ? "spectral" : "spectral+c";
  k.manifold_spec = M.spec();
  k.rank = 1;
  k.zonal = true;
  const geom::Manifold man = M;
  k.zonal_eval = [man, c_shift, tail_tol](double t, double d) {
    // zonal form: rebuild points at that distance on the model
    switch (man.kind()) {
      case geom::ManifoldKind::Circle:
        return spectral_heat_kernel(man, c_shift, t, geom::Point(0.0),
                                    geom::Point(d / man.radius()), tail_tol);
      case geom::ManifoldKind::Sphere:
        return spectral_heat_kernel(man, c_shift, t, geom::Point(0.0, 0.0),
                                    geom::Point(d / man.radius(), 0.0), tail_tol);
      default:
        throw Error(ErrorCode::Internal, "torus spectral kernel is not zonal in one variable");
    }
  };
  if (M.kind() == geom::ManifoldKind::FlatTorus) k.zonal = false;
  k.eval = [man, c_shift, tail_tol](double t, const geom::Point& x, const geom::Point& y,
                                    std::complex<double>* out) {
    out[0] = spectral_heat_kernel(man, c_shift, t, x, y, tail_tol);
  };
  return k;
}

double periodized_gauss_circle(double R, double t, double arc, double tail_tol) {
  double acc = 0.0;
  const double L = 2.0 * M_PI * R;
  for (int n = 0; n < 10000; ++n) {
    double term = gauss_e(1, t, arc + n * L) + (n > 0 ? gauss_e(1, t, arc - n * L) : 0.0);
    acc += term;
    if (n * L > std::abs(arc) && term < tail_tol) break;
  }
  return acc;
}

// ------------------------- Galerkin oracle -------------------------

struct GalerkinOracle::Cache {
  std::mutex mu;
  double t = -1.0;
  Eigen::MatrixXcd F;
};

GalerkinOracle::GalerkinOracle(const geom::Manifold& M, const bundles::BundleModel& B,
                               int initial_modes, double stabilize_tol)
    : M_(M), B_(B), rank_(B.rank), cache_(std::make_shared<Cache>()) {
  if (M.kind() != geom::ManifoldKind::Circle)
    throw UnsupportedModelError("GalerkinOracle: S1 only");
  if (initial_modes < 16) initial_modes = 16;
  assemble(initial_modes);
  // grow the mode cutoff until the kernel stops moving on a probe grid
  const double t_probe = 0.05;
  std::vector<geom::Point> probes{geom::Point(0.0), geom::Point(0.7), geom::Point(2.1),
                                  geom::Point(4.4)};
  auto snapshot = [&]() {
    Eigen::MatrixXcd snap(rank_ * probes.size(), rank_ * probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i)
      for (std::size_t j = 0; j < probes.size(); ++j)
        snap.block(rank_ * i, rank_ * j, rank_, rank_) = kernel(t_probe, probes[i], probes[j]);
    return snap;
  };
  Eigen::MatrixXcd prev = snapshot();
  int N = initial_modes;
  while (N < 512) {
    int Nn = N + std::max(8, N / 2);
    assemble(Nn);
    Eigen::MatrixXcd cur = snapshot();
    double change = (cur - prev).cwiseAbs().maxCoeff();
    prev = cur;
    N = Nn;
    if (change < stabilize_tol) return;
  }
  throw TruncationError("GalerkinOracle: kernel did not stabilize below 512 modes");
}

void GalerkinOracle::assemble(int N) {
  const double R = M_.radius();
  const int k = rank_;
  const int nmodes = 2 * N + 1;
  const int dim = k * nmodes;
  ns_.resize(nmodes);
  for (int i = 0; i < nmodes; ++i) ns_[i] = i - N;
  const int G = std::max(256, 8 * N + 16);

  std::vector<Eigen::MatrixXcd> Vth(G), Ath(G), Apth(G);
  bool have_A = B_.kind == bundles::BundleKind::TrivialRank2 && !B_.connection.is_zero;
  for (int g = 0; g < G; ++g) {
    double th = 2.0 * M_PI * g / G;
    Vth[g] = B_.potential(geom::Point(th));
    if (have_A) {
      Ath[g] = B_.connection.value(th);
      Apth[g] = B_.connection.arc_deriv(th);
    }
  }

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (int bi = 0; bi < nmodes; ++bi) {
    const int n = ns_[bi];
    // G_n(theta) = (n/R)^2 I - (2 i n / R) A - A'_s - A^2 + V
    std::vector<Eigen::MatrixXcd> Gn(G);
    for (int g = 0; g < G; ++g) {
      Eigen::MatrixXcd v = (double(n) * n / (R * R)) * Eigen::MatrixXcd::Identity(k, k);
      if (have_A)
        v += -std::complex<double>(0.0, 2.0 * n / R) * Ath[g] - Apth[g] - Ath[g] * Ath[g];
      v += Vth[g];
      Gn[g] = v;
    }
    for (int ai = 0; ai < nmodes; ++ai) {
      const int m = ns_[ai];
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(k, k);
      for (int g = 0; g < G; ++g) {
        double ph = 2.0 * M_PI * g * (n - m) / G;
        acc += std::exp(std::complex<double>(0.0, ph)) * Gn[g];
      }
      H.block(k * ai, k * bi, k, k) = acc / double(G);
    }
  }
  double herm = (H - H.adjoint()).norm();
  if (herm > 1e-9) {
    std::ostringstream os;
    os << "GalerkinOracle: assembled matrix is not hermitian, ||H-H*|| = " << herm;
    throw AssemblyError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((H + H.adjoint()) / 2.0);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  N_ = N;
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->t = -1.0;
}

Eigen::MatrixXcd GalerkinOracle::kernel(double t, const geom::Point& x, const geom::Point& y) const {
  if (!(t > 0)) throw DomainError("GalerkinOracle::kernel: t must be > 0");
  const int k = rank_;
  const int nmodes = static_cast<int>(ns_.size());
  Eigen::MatrixXcd F;
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->t != t) {
      Eigen::VectorXd w = (-t * evals_.array()).exp();
      cache_->F = evecs_ * w.asDiagonal() * evecs_.adjoint();
      cache_->t = t;
    }
    F = cache_->F;
  }
  const double thx = M_.canonical(x).c[0];
  const double thy = M_.canonical(y).c[0];
  Eigen::VectorXcd wx(nmodes), wy(nmodes);
  for (int i = 0; i < nmodes; ++i) {
    wx(i) = std::exp(std::complex<double>(0.0, ns_[i] * thx));
    wy(i) = std::exp(std::complex<double>(0.0, -ns_[i] * thy));
  }
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(k, k);
  for (int ai = 0; ai < nmodes; ++ai)
    for (int bi = 0; bi < nmodes; ++bi)
      K += (wx(ai) * wy(bi)) * F.block(k * ai, k * bi, k, k);
  return K / (2.0 * M_PI * M_.radius());
}

TimeKernel GalerkinOracle::as_time_kernel() const {
  TimeKernel k;
  k.name = "galerkin";
  k.manifold_spec = M_.spec();
  k.rank = rank_;
  k.is_real = false;
  auto self = *this;  // shared eigendata
  k.eval = [self](double t, const geom::Point& x, const geom::Point& y,
                  std::complex<double>* out) {
    Eigen::Map<Eigen::MatrixXcd> res(out, self.rank(), self.rank());
    res = self.kernel(t, x, y);
  };
  return k;
}

// ------------------------- verifiers -------------------------

PairGrid make_pair_grid(const geom::Manifold& M, int n, double dmax) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "make_pair_grid: n >= 2");
  if (dmax <= 0.0) dmax = 0.98 * M.diameter();
  PairGrid g;
  geom::Point x0;
  switch (M.kind()) {
    case geom::ManifoldKind::Circle: x0 = geom::Point(0.0); break;
    case geom::ManifoldKind::FlatTorus: x0 = geom::Point(0.0, 0.0); break;
    case geom::ManifoldKind::Sphere: x0 = geom::Point(0.0, 0.0); break;
  }
  for (int i = 1; i <= n; ++i) {
    double d = dmax * i / n;
    geom::Point y;
    switch (M.kind()) {
      case geom::ManifoldKind::Circle: y = geom::Point(d / M.radius()); break;
      case geom::ManifoldKind::FlatTorus: {
        double hyp = std::hypot(M.L1(), M.L2());
        y = geom::Point(d * M.L1() / hyp, d * M.L2() / hyp);
        break;
      }
      case geom::ManifoldKind::Sphere: y = geom::Point(d / M.radius(), 0.0); break;
    }
    g.xs.push_back(x0);
    g.ys.push_back(M.canonical(y));
    g.d.push_back(M.distance(x0, y));
  }
  return g;
}

PairGrid make_random_pairs(const geom::Manifold& M, int n, unsigned long long seed) {
  PairGrid g;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    geom::Point x = M.sample_uniform(rng), y = M.sample_uniform(rng);
    g.xs.push_back(x);
    g.ys.push_back(y);
    g.d.push_back(M.distance(x, y));
  }
  return g;
}

BoundFitReport heat_bound_check(const TimeKernel& q, const geom::Manifold& M,
                                const std::vector<double>& t_grid, const PairGrid& pairs,
                                const std::vector<double>& B_list, double C_cap) {
  BoundFitReport rep;
  rep.B = B_list;
  rep.cap = C_cap;
  double needC = 0.0, worst_ratio = 0.0;
  for (double t : t_grid) {
    for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
      double nq = spectral_norm(q(t, pairs.xs[i], pairs.ys[i]));
      double kD = spectral_heat_kernel(M, 0.0, t, pairs.xs[i], pairs.ys[i]);
      double denom = 0.0;
      for (double Bj : B_list)
        denom += spectral_heat_kernel(M, 0.0, Bj * t, pairs.xs[i], pairs.ys[i]);
      denom *= t;
      needC = std::max(needC, (nq - kD) / std::max(denom, kTiny));
      worst_ratio = std::max(worst_ratio, nq / std::max(kD + C_cap * denom, kTiny));
      ++rep.points;
    }
  }
  rep.fitted_C = std::max(0.0, needC);
  rep.max_violation_ratio = worst_ratio;
  rep.pass = std::isfinite(needC) && rep.fitted_C <= C_cap;
  return rep;
}

HeatRelatedReport heat_related_check(const TimeKernel& q, const TimeKernel& qp,
                                     const geom::Manifold& M, const std::vector<double>& t_grid,
                                     const PairGrid& pairs, const std::vector<double>& B_list) {
  if (q.rank != qp.rank) throw ConfigError("heat_related_check: rank mismatch");
  HeatRelatedReport rep;
  rep.t_grid = t_grid;
  const int m = M.dim();
  bool any = false;
  std::vector<Eigen::Vector3d> rows;  // (log d, log t, log(|diff|/e))
  for (double t : t_grid) {
    double best = 0.0;
    for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
      Eigen::MatrixXcd dq = q(t, pairs.xs[i], pairs.ys[i]) - qp(t, pairs.xs[i], pairs.ys[i]);
      double nd = spectral_norm(dq);
      double denom = 0.0;
      for (double Bj : B_list)
        denom += spectral_heat_kernel(M, 0.0, Bj * t, pairs.xs[i], pairs.ys[i]);
      best = std::max(best, nd / std::max(denom, kTiny));
      if (nd > 1e-15) {
        any = true;
        double d = pairs.d[i];
        if (d > 1e-12)
          rows.emplace_back(std::log(d), std::log(t), std::log(nd / gauss_e(m, t, d)));
      }
    }
    rep.max_ratio.push_back(best);
  }
  if (!any) {
    rep.exactly_equal = true;
    rep.pass = true;
    return rep;
  }
  // beta: slope of log max-ratio against log t
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (rep.max_ratio[i] <= 0) continue;
      double lx = std::log(t_grid[i]), ly = std::log(rep.max_ratio[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    if (n >= 2) rep.beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  // Lemma form: least squares on log|diff|/e = c + alpha log d + beta log t
  if (rows.size() >= 4) {
    Eigen::MatrixXd A(rows.size(), 3);
    Eigen::VectorXd b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      A(i, 0) = rows[i][0];
      A(i, 1) = rows[i][1];
      A(i, 2) = 1.0;
      b(i) = rows[i][2];
    }
    Eigen::Vector3d sol = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    rep.lemma_alpha = sol[0];
    rep.lemma_beta = sol[1];
    rep.lemma_combined = sol[1] + 0.5 * sol[0];
  }
  rep.pass = rep.beta > 1.0 || rep.lemma_combined > 1.0;
  return rep;
}

DuhamelReport duhamel_residual(const TimeKernel& k, const geom::Manifold& M,
                               const fields::PotentialField& v, double t, const geom::Point& x,
                               int grid_N, double collar_eta) {
  if (k.rank != 1) throw UnsupportedModelError("duhamel_residual: scalar kernels only");
  if (t < 1e-3 || t > k.t_max)
    throw StepError("duhamel_residual: t outside the central-difference-safe range [1e-3, t_max]");
  if (M.kind() == geom::ManifoldKind::Sphere)
    throw UnsupportedModelError("duhamel_residual: use sphere_zonal_residual on S2");
  const double h = std::max(1e-5, 0.015 * t);
  const double ts[5] = {t - 2 * h, t - h, t, t + h, t + 2 * h};
  DuhamelReport rep;
  const int m = M.dim();
  double vx = v.is_zero ? 0.0 : v(x)(0, 0).real();

  auto scalar_at = [&](double tt, const geom::Point& xx, const geom::Point& yy) {
    std::complex<double> val;
    k.eval(tt, xx, yy, &val);
    return val.real();
  };

  if (M.kind() == geom::ManifoldKind::Circle) {
    const int G = grid_N;
    const double R = M.radius();
    const double x0 = M.canonical(x).c[0];
    // spatial positive-Laplacian stencil at node 0 from the mode multipliers
    std::vector<double> stencil(G, 0.0);
    for (int i = 0; i < G; ++i) {
      double acc = 0.0;
      for (int n = 1; n < G / 2; ++n)
        acc += 2.0 * (n / R) * (n / R) * std::cos(2.0 * M_PI * n * i / G);
      acc += (G / 2 / R) * ((double)G / 2 / R) * std::cos(M_PI * i);
      stencil[i] = acc / G;
    }
    std::vector<geom::Point> theta(G);
    for (int i = 0; i < G; ++i) theta[i] = geom::Point(x0 + 2.0 * M_PI * i / G);
    // y sweep over the grid
    for (int j = 0; j < G; ++j) {
      const geom::Point& y = theta[j];
      double col[5];
      for (int s = 0; s < 5; ++s) col[s] = scalar_at(ts[s], x, y);
      double dtk = (-col[4] + 8 * col[3] - 8 * col[1] + col[0]) / (12.0 * h);
      double lap = 0.0;
      for (int i = 0; i < G; ++i) lap += stencil[i] * scalar_at(t, theta[i], y);
      double resid = dtk + lap + vx * col[2];
      double d = M.distance(x, y);
      rep.y_distance.push_back(d);
      rep.ratio.push_back(std::abs(resid) / gauss_e(m, t, d));
    }
  } else {  // flat torus
    const int G = grid_N;
    const double L1 = M.L1(), L2 = M.L2();
    geom::Point cx = M.canonical(x);
    std::vector<double> st1(G, 0.0), st2(G, 0.0);
    for (int i = 0; i < G; ++i) {
      double a1 = 0.0, a2 = 0.0;
      for (int n = 1; n < G / 2; ++n) {
        a1 += 2.0 * std::pow(2.0 * M_PI * n / L1, 2) * std::cos(2.0 * M_PI * n * i / G);
        a2 += 2.0 * std::pow(2.0 * M_PI * n / L2, 2) * std::cos(2.0 * M_PI * n * i / G);
      }
      a1 += std::pow(2.0 * M_PI * (G / 2) / L1, 2) * std::cos(M_PI * i);
      a2 += std::pow(2.0 * M_PI * (G / 2) / L2, 2) * std::cos(M_PI * i);
      st1[i] = a1 / G;
      st2[i] = a2 / G;
    }
    const int ny = 48;
    double hyp = std::hypot(L1, L2);
    for (int j = 1; j <= ny; ++j) {
      double d = 0.49 * hyp * j / ny;
      geom::Point y = M.canonical(geom::Point(cx.c[0] + d * L1 / hyp, cx.c[1] + d * L2 / hyp));
      double col[5];
      for (int s = 0; s < 5; ++s) col[s] = scalar_at(ts[s], x, y);
      double dtk = (-col[4] + 8 * col[3] - 8 * col[1] + col[0]) / (12.0 * h);
      double lap = 0.0;
      for (int i = 0; i < G; ++i) {
        lap += st1[i] * scalar_at(t, M.canonical(geom::Point(cx.c[0] + L1 * i / G, cx.c[1])), y);
        lap += st2[i] * scalar_at(t, M.canonical(geom::Point(cx.c[0], cx.c[1] + L2 * i / G)), y);
      }
      double resid = dtk + lap + vx * col[2];
      double dd = M.distance(x, y);
      rep.y_distance.push_back(dd);
      rep.ratio.push_back(std::abs(resid) / gauss_e(m, t, dd));
    }
  }
  for (std::size_t i = 0; i < rep.ratio.size(); ++i) {
    rep.max_ratio = std::max(rep.max_ratio, rep.ratio[i]);
    if (collar_eta > 0 && rep.y_distance[i] <= 0.9 * collar_eta)
      rep.max_ratio_off_collar = std::max(rep.max_ratio_off_collar, rep.ratio[i]);
  }
  return rep;
}

double sphere_zonal_residual(const std::function<double(double, double)>& g, double R, double t,
                             const std::vector<double>& d_grid) {
  const double hd = 1e-4 * R;
  const double ht = 1e-4 * t;
  double worst = 0.0;
  for (double d : d_grid) {
    double gpp = (g(t, d + hd) - 2.0 * g(t, d) + g(t, d - hd)) / (hd * hd);
    double gp = (g(t, d + hd) - g(t, d - hd)) / (2.0 * hd);
    double dtg = (g(t + ht, d) - g(t - ht, d)) / (2.0 * ht);
    double lap = -gpp - (1.0 / R) * (std::cos(d / R) / std::sin(d / R)) * gp;
    double resid = dtg + lap;
    worst = std::max(worst, std::abs(resid) / gauss_e(2, t, d));
  }
  return worst;
}

HsuReport hsu_check(const geom::Manifold& M, const std::vector<double>& t_grid, int n_pairs,
                    unsigned long long seed) {
  auto run = [&](int np, int t_refine) {
    double mn = std::numeric_limits<double>::infinity();
    auto pairs = make_random_pairs(M, np, seed);
    const int m = M.dim();
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      for (int rr = 0; rr < t_refine; ++rr) {
        double t = t_grid[ti];
        if (t_refine > 1 && ti + 1 < t_grid.size())
          t += (t_grid[ti + 1] - t_grid[ti]) * rr / t_refine;
        for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
          double kD = spectral_heat_kernel(M, 0.0, t, pairs.xs[i], pairs.ys[i]);
          double e = gauss_e(m, t, pairs.d[i]);
          mn = std::min(mn, kD / std::max(e, kTiny));
        }
      }
    }
    return mn;
  };
  HsuReport rep;
  rep.min_ratio = run(n_pairs, 1);
  rep.min_ratio_refined = run(2 * n_pairs, 2);
  rep.stability = std::abs(rep.min_ratio_refined / rep.min_ratio - 1.0);
  rep.positive = rep.min_ratio > 0.0 && std::isfinite(rep.min_ratio);
  return rep;
}

}  // namespace heatpath::kernels
