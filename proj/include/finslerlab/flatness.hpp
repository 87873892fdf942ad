#pragma once

/// @file flatness.hpp
/// Numerical certificates of projective flatness: Hamel and Rapcsak
/// residuals, the projective factor P, spray proportionality G = P y,
/// geodesic integration, and the structure equations satisfied by alpha and
/// beta of a projectively flat (alpha,beta)-metric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/ab_metric.hpp"
#include "finslerlab/diffgeo.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"
#include "finslerlab/parallel.hpp"
#include "finslerlab/phi.hpp"

namespace finslerlab {

namespace detail {

inline MixedDerivatives F_derivatives(const ABMetric& m, const Point& x, const TangentVector& y) {
  check_args(m, x, y);
  return mixed_xy([&m](const Vec<D2>& xs, const Vec<D2>& ys) { return m(xs, ys); }, x.coords, y.comps);
}

inline double hamel_of(const MixedDerivatives& d) {
  double r = 0.0;
  const std::size_t n = d.dx.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) r = std::max(r, std::abs(d.dxdy(k, l) - d.dxdy(l, k)));
  return r;
}

inline double rapcsak_of(const MixedDerivatives& d, const TangentVector& y) {
  double r = 0.0;
  const std::size_t n = d.dx.size();
  for (std::size_t l = 0; l < n; ++l) {
    double acc = -d.dx[l];
    for (std::size_t k = 0; k < n; ++k) acc += d.dxdy(k, l) * y[k];
    r = std::max(r, std::abs(acc));
  }
  return r;
}

inline double projective_of(const MixedDerivatives& d, const TangentVector& y) {
  return dot(d.dx, y.comps) / (2.0 * d.value);
}

}  // namespace detail

/// max_{k,l} |F_{x^k y^l} - F_{x^l y^k}|.
inline double hamel_residual(const ABMetric& m, const Point& x, const TangentVector& y) {
  return detail::hamel_of(detail::F_derivatives(m, x, y));
}

/// max_l |F_{x^k y^l} y^k - F_{x^l}|.
inline double rapcsak_residual(const ABMetric& m, const Point& x, const TangentVector& y) {
  return detail::rapcsak_of(detail::F_derivatives(m, x, y), y);
}

/// P = F_{x^k} y^k / (2F).
inline double projective_factor(const ABMetric& m, const Point& x, const TangentVector& y) {
  return detail::projective_of(detail::F_derivatives(m, x, y), y);
}

/// max_i |G^i - P y^i| with G from spray_ab.
inline double spray_proportionality_residual(const ABMetric& m, const Point& x, const TangentVector& y) {
  const double P = projective_factor(m, x, y);
  const Vec<double> G = spray_ab(m, x, y);
  double r = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) r = std::max(r, std::abs(G[i] - P * y[i]));
  return r;
}

struct SampleSet {
  std::vector<Point> x;
  std::vector<TangentVector> y;
};

/// x uniform in the ball of radius `radius`, y uniform on the unit sphere.
inline SampleSet sample_points(int dim, int count, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sphere = [&] {
    Vec<double> v(static_cast<std::size_t>(dim));
    double n2 = 0.0;
    do {
      for (double& c : v) c = gauss(rng);
      n2 = norm2(v);
    } while (n2 < 1e-12);
    for (double& c : v) c /= n2;
    return v;
  };
  SampleSet s;
  for (int i = 0; i < count; ++i) {
    Vec<double> dir = sphere();
    const double r = radius * std::pow(unit(rng), 1.0 / dim);
    for (double& c : dir) c *= r;
    s.x.emplace_back(std::move(dir));
    s.y.emplace_back(sphere());
  }
  return s;
}

struct FlatnessOptions {
  int samples = 100;
  std::uint64_t seed = 12345;
  double radius_fraction = 0.8;  ///< samples stay in |x| <= fraction * domain radius
  double tolerance = 1e-6;
  int threads = 1;
};

struct FlatnessReport {
  double max_hamel = 0.0;
  double max_rapcsak = 0.0;
  double max_spray_dev = 0.0;  ///< max |G - P y| / (|G| + 1)
  int samples = 0;
  double tolerance = 0.0;
  bool pass = false;
  Point worst_x;  ///< sample with the largest Hamel residual
  TangentVector worst_y;
};

/// Working radius for sampling: the domain radius, or 1 when unbounded.
inline double working_radius(const ABMetric& m) {
  const double R = m.domain_radius();
  return std::isfinite(R) ? R : 1.0;
}

/// Hamel, Rapcsak and spray-proportionality residuals over seeded samples.
inline FlatnessReport certify_flatness(const ABMetric& m, const FlatnessOptions& opt = {}) {
  if (opt.samples < 1) throw Error("certify_flatness needs at least one sample");
  if (!(opt.tolerance > 0.0)) throw Error("tolerance must be positive");
  const SampleSet s = sample_points(m.dim(), opt.samples, opt.radius_fraction * working_radius(m), opt.seed);
  const std::size_t n = s.x.size();
  std::vector<double> ham(n), rap(n), spr(n);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    const MixedDerivatives d = detail::F_derivatives(m, s.x[i], s.y[i]);
    ham[i] = detail::hamel_of(d);
    rap[i] = detail::rapcsak_of(d, s.y[i]);
    const double P = detail::projective_of(d, s.y[i]);
    const Vec<double> G = spray_ab(m, s.x[i], s.y[i]);
    double dev = 0.0;
    for (std::size_t k = 0; k < G.size(); ++k) dev = std::max(dev, std::abs(G[k] - P * s.y[i][k]));
    spr[i] = dev / (norm2(G) + 1.0);
  });
  FlatnessReport rep;
  rep.samples = static_cast<int>(n);
  rep.tolerance = opt.tolerance;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ham[i] > rep.max_hamel) worst = i;
    rep.max_hamel = std::max(rep.max_hamel, ham[i]);
    rep.max_rapcsak = std::max(rep.max_rapcsak, rap[i]);
    rep.max_spray_dev = std::max(rep.max_spray_dev, spr[i]);
  }
  rep.worst_x = s.x[worst];
  rep.worst_y = s.y[worst];
  rep.pass = rep.max_hamel <= opt.tolerance && rep.max_rapcsak <= opt.tolerance && rep.max_spray_dev <= opt.tolerance;
  return rep;
}

struct GeodesicTrace {
  std::vector<double> times;
  std::vector<Point> points;
  std::vector<TangentVector> velocities;
  double step = 0.0;
  bool truncated = false;    ///< an evaluation failed mid-step
  bool reached_stop = false; ///< the next step would have left |x| < stop_radius
  std::string note;
};

using SprayFn = std::function<Vec<double>(const Point&, const TangentVector&)>;

namespace detail {

inline void rk4_step(const SprayFn& G, Vec<double>& x, Vec<double>& y, double h) {
  const std::size_t n = x.size();
  auto acc = [&](const Vec<double>& xx, const Vec<double>& yy) {
    Vec<double> g = G(Point(xx), TangentVector(yy));
    for (double& v : g) v *= -2.0;
    return g;
  };
  auto axpy = [n](const Vec<double>& a, const Vec<double>& b, double c) {
    Vec<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = a[i] + c * b[i];
    return r;
  };
  const Vec<double> k1x = y, k1y = acc(x, y);
  const Vec<double> x2 = axpy(x, k1x, h / 2), y2 = axpy(y, k1y, h / 2);
  const Vec<double> k2x = y2, k2y = acc(x2, y2);
  const Vec<double> x3 = axpy(x, k2x, h / 2), y3 = axpy(y, k2y, h / 2);
  const Vec<double> k3x = y3, k3y = acc(x3, y3);
  const Vec<double> x4 = axpy(x, k3x, h), y4 = axpy(y, k3y, h);
  const Vec<double> k4x = y4, k4y = acc(x4, y4);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
    y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
  }
}

}  // namespace detail

inline SprayFn spray_of(const ABMetric& m) {
  return [m](const Point& x, const TangentVector& y) { return spray_ab(m, x, y); };
}

/// RK4 for x' = y, y' = -2 G(x, y) until |x| would reach stop_radius or
/// max_steps is exhausted.
inline GeodesicTrace integrate_geodesic(const SprayFn& G, const Point& x0, const TangentVector& y0, double stop_radius,
                                        double step, std::size_t max_steps = 200000) {
  if (!(step > 0.0)) throw Error("geodesic step must be positive");
  if (y0.is_zero()) throw DomainError("initial velocity must be nonzero");
  if (!(x0.norm() < stop_radius)) throw DomainError("initial point outside the stop radius");
  GeodesicTrace tr;
  tr.step = step;
  Vec<double> x = x0.coords, y = y0.comps;
  tr.times.push_back(0.0);
  tr.points.push_back(x0);
  tr.velocities.push_back(y0);
  for (std::size_t k = 1; k <= max_steps; ++k) {
    Vec<double> xn = x, yn = y;
    try {
      detail::rk4_step(G, xn, yn, step);
    } catch (const Error& e) {
      tr.truncated = true;
      tr.note = e.what();
      break;
    }
    if (!(norm2(xn) < stop_radius)) {
      tr.reached_stop = true;
      break;
    }
    x = std::move(xn);
    y = std::move(yn);
    tr.times.push_back(static_cast<double>(k) * step);
    tr.points.emplace_back(x);
    tr.velocities.emplace_back(y);
  }
  return tr;
}

inline GeodesicTrace integrate_geodesic(const ABMetric& m, const Point& x0, const TangentVector& y0, double stop_radius,
                                        double step, std::size_t max_steps = 200000) {
  return integrate_geodesic(spray_of(m), x0, y0, stop_radius, step, max_steps);
}

/// State after integrating to time T with n_steps equal RK4 steps.
inline std::pair<Point, TangentVector> integrate_to_time(const SprayFn& G, const Point& x0, const TangentVector& y0,
                                                        double T, int n_steps) {
  Vec<double> x = x0.coords, y = y0.comps;
  const double h = T / n_steps;
  for (int k = 0; k < n_steps; ++k) detail::rk4_step(G, x, y, h);
  return {Point(std::move(x)), TangentVector(std::move(y))};
}

/// Largest Euclidean distance from the trace points to the line x0 + t y0.
inline double straightness_deviation(const GeodesicTrace& tr) {
  if (tr.points.size() < 3) throw Error("straightness_deviation needs at least 3 trace points");
  const Vec<double>& x0 = tr.points.front().coords;
  Vec<double> u = tr.velocities.front().comps;
  const double nu = norm2(u);
  if (nu == 0.0) throw Error("degenerate trace direction");
  for (double& c : u) c /= nu;
  double dev = 0.0;
  for (const Point& p : tr.points) {
    Vec<double> d(x0.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - x0[i];
    const double along = dot(d, u);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= along * u[i];
    dev = std::max(dev, norm2(d));
  }
  return dev;
}

/// Step-halving ratio |x_h - x_{h/2}| / |x_{h/2} - x_{h/4}| at time T;
/// about 16 for a fourth-order method.
inline double rk4_halving_ratio(const SprayFn& G, const Point& x0, const TangentVector& y0, double T, double h) {
  const int n = static_cast<int>(std::lround(T / h));
  const Point a = integrate_to_time(G, x0, y0, T, n).first;
  const Point b = integrate_to_time(G, x0, y0, T, 2 * n).first;
  const Point c = integrate_to_time(G, x0, y0, T, 4 * n).first;
  Vec<double> d1(a.size()), d2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d1[i] = a[i] - b[i];
    d2[i] = b[i] - c[i];
  }
  return norm2(d1) / norm2(d2);
}

struct StructureResidual {
  double bij = 0.0;  ///< |b_{i|j} - 2 tau {(1+k1 b^2) a_ij + (k3+k2 b^2) b_i b_j}|_F
  double gi = 0.0;   ///< max over y of the part of G_alpha + tau (k1 alpha^2 + k2 beta^2) b^i not along y
  double tau = 0.0;
};

/// Checks the equations
///   b_{i|j} = 2 tau {(1+k1 b^2) a_ij + (k3+k2 b^2) b_i b_j},
///   G^i_alpha = xi y^i - tau (k1 alpha^2 + k2 beta^2) b^i,
/// recovering tau from the trace of the first and eliminating xi by
/// projecting away the y direction. `directions` unit vectors y are drawn
/// from a fixed seed.
inline StructureResidual structure_residual(const MetricField& a, const OneFormField& b, const OdeParams& k,
                                            const Point& x, int directions = 8, std::uint64_t seed = 7) {
  const CovariantData cd = covariant_derivative(b, a, x);
  const std::size_t n = cd.dim();
  const double b2 = cd.b2;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) trace += cd.a_inv(i, j) * cd.bij(i, j);
  const double den = 2.0 * (static_cast<double>(n) * (1.0 + k.k1 * b2) + (k.k3 + k.k2 * b2) * b2);
  if (std::abs(den) < 1e-14) throw EvaluationError("structure_residual: vanishing trace denominator");
  StructureResidual out;
  out.tau = trace / den;
  Mat<double> res(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      res(i, j) = cd.bij(i, j) - 2.0 * out.tau * ((1.0 + k.k1 * b2) * cd.a(i, j) + (k.k3 + k.k2 * b2) * cd.b[i] * cd.b[j]);
  out.bij = frobenius(res);
  const SampleSet dirs = sample_points(static_cast<int>(n), directions, 0.0, seed);
  for (const TangentVector& y : dirs.y) {
    Vec<double> v = cd.spray_alpha(y);
    const double c = out.tau * (k.k1 * cd.alpha2(y) + k.k2 * cd.beta(y) * cd.beta(y));
    for (std::size_t i = 0; i < n; ++i) v[i] += c * cd.b_up[i];
    const double along = dot(v, y.comps) / dot(y.comps, y.comps);
    for (std::size_t i = 0; i < n; ++i) v[i] -= along * y[i];
    out.gi = std::max(out.gi, norm2(v));
  }
  return out;
}

}  // namespace finslerlab
