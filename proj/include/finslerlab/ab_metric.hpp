#pragma once

/// @file ab_metric.hpp
/// (alpha,beta)-metrics F = alpha phi(beta/alpha): evaluation, fundamental
/// tensor, spray coefficients, and Zermelo navigation for Randers metrics.

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>

#include "finslerlab/diffgeo.hpp"
#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"
#include "finslerlab/phi.hpp"

namespace finslerlab {

struct ABMetric {
  MetricField alpha;
  OneFormField beta;
  PhiSpec phi;
  std::string name;

  int dim() const { return alpha.dim(); }
  double domain_radius() const { return std::min(alpha.domain_radius(), beta.domain_radius()); }
  bool contains(const Point& x) const { return alpha.contains(x) && beta.contains(x); }

  /// F on any scalar type.
  template <class T>
  T operator()(const Vec<T>& x, const Vec<T>& y) const {
    using std::sqrt;
    const Mat<T> a = alpha(x);
    const Vec<T> b = beta(x);
    const T al = sqrt(bilinear(a, y, y));
    return al * phi.eval(dot(b, y) / al);
  }
};

namespace detail {

inline void check_args(const ABMetric& m, const Point& x, const TangentVector& y) {
  m.alpha.require_inside(x);
  if (static_cast<int>(y.size()) != m.dim()) throw DomainError("tangent vector has the wrong dimension");
  if (y.is_zero()) throw DomainError("F is evaluated on nonzero vectors only");
}

inline Vec<D2> seed2(const Vec<double>& v, int outer, int inner) {
  Vec<D2> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    r[i] = D2{D1{v[i], static_cast<int>(i) == inner ? 1.0 : 0.0}, D1{static_cast<int>(i) == outer ? 1.0 : 0.0, 0.0}};
  }
  return r;
}

inline Vec<D2> constant2(const Vec<double>& v) {
  Vec<D2> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = D2(v[i]);
  return r;
}

}  // namespace detail

/// Value, x-gradient, y-gradient and mixed derivatives M(k,l) = L_{x^k y^l}
/// of a function L(x, y) given as a generic callable.
struct MixedDerivatives {
  double value = 0.0;
  Vec<double> dx;
  Vec<double> dy;
  Mat<double> dxdy;
};

template <class Fn>
MixedDerivatives mixed_xy(const Fn& fn, const Vec<double>& x, const Vec<double>& y) {
  const int n = static_cast<int>(x.size());
  MixedDerivatives out;
  out.dx.assign(x.size(), 0.0);
  out.dy.assign(x.size(), 0.0);
  out.dxdy = Mat<double>(x.size());
  for (int k = 0; k < n; ++k) {
    const Vec<D2> xs = detail::seed2(x, k, -1);
    for (int l = 0; l < n; ++l) {
      const Vec<D2> ys = detail::seed2(y, -1, l);
      const D2 r = fn(xs, ys);
      out.value = r.v.v;
      out.dy[l] = r.v.d;
      out.dx[k] = r.d.v;
      out.dxdy(k, l) = r.d.d;
    }
  }
  return out;
}

/// Hessian in y of a generic callable L(x, y).
template <class Fn>
Mat<double> hessian_y(const Fn& fn, const Vec<double>& x, const Vec<double>& y) {
  const int n = static_cast<int>(x.size());
  const Vec<D2> xs = detail::constant2(x);
  Mat<double> h(x.size());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const D2 r = fn(xs, detail::seed2(y, i, j));
      h(i, j) = r.d.d;
      h(j, i) = r.d.d;
    }
  return h;
}

/// F(x, y) = alpha(x,y) phi(beta(x,y) / alpha(x,y)).
inline double F_eval(const ABMetric& m, const Point& x, const TangentVector& y) {
  detail::check_args(m, x, y);
  return m(x.coords, y.comps);
}

struct FundamentalTensor {
  Mat<double> g;
  double min_eigenvalue = 0.0;
  bool positive_definite = false;
};

/// g_ij = [F^2 / 2]_{y^i y^j} with its smallest eigenvalue.
inline FundamentalTensor fundamental_tensor(const ABMetric& m, const Point& x, const TangentVector& y) {
  detail::check_args(m, x, y);
  FundamentalTensor out;
  out.g = hessian_y(
      [&m](const Vec<D2>& xs, const Vec<D2>& ys) {
        const D2 f = m(xs, ys);
        return 0.5 * f * f;
      },
      x.coords, y.comps);
  const Vec<double> ev = symmetric_eigenvalues(out.g);
  out.min_eigenvalue = *std::min_element(ev.begin(), ev.end());
  out.positive_definite = out.min_eigenvalue > 0.0;
  return out;
}

struct QTP {
  double Q = 0.0;
  double Theta = 0.0;
  double Psi = 0.0;
};

/// The scalars Q, Theta, Psi entering the spray of an (alpha,beta)-metric.
inline QTP qtp(const PhiSpec& phi, double s, double b2) {
  const Jet2 j = phi.jet(s);
  const double f = j.f0 - s * j.f1;
  const double den = f + (b2 - s * s) * j.f2;
  if (!(f > 0.0) || !(den > 0.0)) {
    std::ostringstream os;
    os << "regularity violated at s=" << s << ", b^2=" << b2 << " (phi - s phi' = " << f
       << ", phi - s phi' + (b^2 - s^2) phi'' = " << den << ")";
    throw RegularityError(os.str());
  }
  return {j.f1 / f, (f * j.f1 - s * j.f0 * j.f2) / (2.0 * j.f0 * den), j.f2 / (2.0 * den)};
}

/// Spray coefficients assembled from those of alpha and the covariant
/// derivative of beta:
///   G = G_alpha + alpha Q s^i_0 + alpha^{-1} Theta (-2 alpha Q s_0 + r_00) y
///       + Psi (-2 alpha Q s_0 + r_00) b^i.
inline Vec<double> spray_ab(const ABMetric& m, const Point& x, const TangentVector& y) {
  detail::check_args(m, x, y);
  const CovariantData cd = covariant_derivative(m.beta, m.alpha, x);
  const double al = std::sqrt(cd.alpha2(y));
  const double s = cd.beta(y) / al;
  const QTP c = qtp(m.phi, s, cd.b2);
  const double w = -2.0 * al * c.Q * cd.s0(y) + cd.r00(y);
  Vec<double> G = cd.spray_alpha(y);
  const Vec<double> si0 = cd.s_up0(y);
  for (std::size_t i = 0; i < G.size(); ++i)
    G[i] += al * c.Q * si0[i] + c.Theta * w * y[i] / al + c.Psi * w * cd.b_up[i];
  return G;
}

/// Spray from the definition G^i = 1/4 g^{il} {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}}.
/// Independent of the (alpha,beta) structure; used as a cross-check.
inline Vec<double> spray_from_definition(const ABMetric& m, const Point& x, const TangentVector& y) {
  detail::check_args(m, x, y);
  auto L = [&m](const Vec<D2>& xs, const Vec<D2>& ys) {
    const D2 f = m(xs, ys);
    return f * f;
  };
  const MixedDerivatives d = mixed_xy(L, x.coords, y.comps);
  const Mat<double> g = hessian_y(L, x.coords, y.comps) * 0.5;
  const Mat<double> gi = inverse(g);
  const std::size_t n = y.size();
  Vec<double> rhs(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    double acc = -d.dx[l];
    for (std::size_t k = 0; k < n; ++k) acc += d.dxdy(k, l) * y[k];
    rhs[l] = acc;
  }
  Vec<double> G = matvec(gi, rhs);
  for (double& v : G) v *= 0.25;
  return G;
}

/// Zermelo navigation data: a Riemannian metric h and a vector field W
/// with |W|_h < 1.
struct NavigationData {
  MetricField h;
  VectorField W;
};

struct RandersSample {
  Mat<double> a;
  Vec<double> b;
};

struct NavigationSample {
  Mat<double> h;
  Vec<double> W;
};

namespace detail {

template <class T>
std::pair<Mat<T>, Vec<T>> navigation_pointwise(const Mat<T>& h, const Vec<T>& W) {
  const Vec<T> wf = matvec(h, W);
  const T lam = 1.0 - dot(wf, W);
  if (!(value_of(lam) > 0.0)) throw DomainError("navigation data needs |W|_h < 1");
  Mat<T> a = (h * lam + outer(wf, wf)) * (1.0 / (lam * lam));
  Vec<T> b = scaled(wf, -1.0 / lam);
  return {std::move(a), std::move(b)};
}

}  // namespace detail

/// alpha = sqrt((1-|W|^2) h^2 + (W^flat)^2) / (1-|W|^2), beta = -W^flat / (1-|W|^2).
inline RandersSample navigation_to_randers(const NavigationData& nav, const Point& x) {
  nav.h.require_inside(x);
  auto [a, b] = detail::navigation_pointwise(nav.h(x), nav.W(x));
  return {std::move(a), std::move(b)};
}

/// h = sqrt(1-b^2) sqrt(alpha^2 - beta^2), W^flat = -(1-b^2) beta, W = h^{-1} W^flat.
inline NavigationSample randers_to_navigation(const MetricField& alpha, const OneFormField& beta, const Point& x) {
  alpha.require_inside(x);
  const Mat<double> a = alpha(x);
  const Vec<double> b = beta(x);
  const double b2 = bilinear(inverse(a), b, b);
  if (!(b2 < 1.0)) throw DomainError("Randers data needs b < 1");
  const double lam = 1.0 - b2;
  NavigationSample out;
  out.h = (a - outer(b, b)) * lam;
  out.W = matvec(inverse(out.h), scaled(b, -lam));
  return out;
}

/// The Randers metric with navigation data (h, W) as an ABMetric.
inline ABMetric randers_from_navigation(const NavigationData& nav, std::string name = "randers") {
  const int n = nav.h.dim();
  const double R = std::min(nav.h.domain_radius(), nav.W.domain_radius());
  MetricField a(n, R, [nav](auto x) { return detail::navigation_pointwise(nav.h(x), nav.W(x)).first; });
  OneFormField b(n, R, [nav](auto x) { return detail::navigation_pointwise(nav.h(x), nav.W(x)).second; });
  return ABMetric{std::move(a), std::move(b), phi_randers(1.0), std::move(name)};
}

}  // namespace finslerlab
