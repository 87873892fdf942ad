#pragma once

// Generators and independent oracles shared by the test programs. Nothing
// here calls the library's differentiation engine: the oracles use central
// differences, composite quadrature and Taylor recurrences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "finslerlab/finslerlab.hpp"

namespace testing_support {

using namespace finslerlab;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec<double> unit_vector(int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec<double> v(static_cast<std::size_t>(n));
    double r = 0.0;
    while (r < 1e-8) {
      for (double& c : v) c = g(rng_);
      r = norm2(v);
    }
    for (double& c : v) c /= r;
    return v;
  }

  Point point_in_ball(int n, double radius) {
    Vec<double> v = unit_vector(n);
    const double r = radius * std::pow(uniform(0.0, 1.0), 1.0 / n);
    for (double& c : v) c *= r;
    return Point(v);
  }

  TangentVector direction(int n) { return TangentVector(unit_vector(n)); }

  Vec<double> vec(int n, double scale) {
    Vec<double> v(static_cast<std::size_t>(n));
    for (double& c : v) c = uniform(-scale, scale);
    return v;
  }

  Mat<double> mat(int n, double scale) {
    Mat<double> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = uniform(-scale, scale);
    return m;
  }

  /// A random quadruple with 1 + (k1+k3) t + k2 t^2 > 0 for t in [0, 0.25].
  OdeParams quadruple(double eps_scale = 1.0) {
    for (;;) {
      OdeParams k{uniform(-2, 2), uniform(-1.5, 1.5), uniform(-2, 2), uniform(-eps_scale, eps_scale)};
      bool ok = std::abs(k.k2 - k.k1 * k.k3) > 1e-3;
      for (double t = 0.0; t <= 0.3; t += 0.01) ok = ok && k.denom(std::sqrt(t)) > 0.2;
      if (ok) return k;
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// a(x) = exp(c.x) (L(x) L(x)^T + 0.5 I) with L(x) = I + sum_k C_k x^k + D x^1 x^2.
inline MetricField random_metric(Gen& g, int n, double radius = 1.0) {
  std::vector<Mat<double>> C;
  for (int k = 0; k < n; ++k) C.push_back(g.mat(n, 0.25));
  const Mat<double> D = g.mat(n, 0.3);
  const Vec<double> c = g.vec(n, 0.3);
  return MetricField(n, radius, [C, D, c, n](auto x) {
    using T = scalar_of<decltype(x)>;
    using std::exp;
    Mat<T> L = Mat<T>::identity(static_cast<std::size_t>(n));
    T cx(0.0);
    for (int k = 0; k < n; ++k) cx = cx + c[k] * x[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) L(i, j) = L(i, j) + C[k](i, j) * x[k];
        L(i, j) = L(i, j) + D(i, j) * x[0] * x[n - 1];
      }
    Mat<T> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T s(i == j ? 0.5 : 0.0);
        for (int k = 0; k < n; ++k) s = s + L(i, k) * L(j, k);
        a(i, j) = s * exp(cx);
      }
    return a;
  });
}

/// b_i = c_i + B_ik x^k + d_i x^1 x^n + e_i sin(x^i).
inline OneFormField random_form(Gen& g, int n, double scale = 0.3, double radius = 1.0) {
  const Vec<double> c = g.vec(n, scale), d = g.vec(n, scale), e = g.vec(n, scale);
  const Mat<double> B = g.mat(n, scale);
  return OneFormField(n, radius, [c, d, e, B, n](auto x) {
    using T = scalar_of<decltype(x)>;
    using std::sin;
    Vec<T> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      T s(c[i]);
      for (int k = 0; k < n; ++k) s = s + B(i, k) * x[k];
      b[i] = s + d[i] * x[0] * x[n - 1] + e[i] * sin(x[i]);
    }
    return b;
  });
}

inline double fd_step(double xi) { return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(xi)); }

/// d a_ij / d x^k by central differences.
inline std::vector<Mat<double>> fd_metric_derivative(const MetricField& a, const Point& x) {
  std::vector<Mat<double>> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = fd_step(x[k]);
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out.push_back((a(xp) - a(xm)) * (0.5 / h));
  }
  return out;
}

/// Gamma^i_jk from finite-difference metric derivatives.
inline std::vector<double> fd_christoffel(const MetricField& a, const Point& x) {
  const std::size_t n = x.size();
  const auto da = fd_metric_derivative(a, x);
  const Mat<double> ai = inverse(a(x));
  std::vector<double> G(n * n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += ai(i, l) * (da[j](l, k) + da[k](j, l) - da[l](j, k));
        G[(i * n + j) * n + k] = 0.5 * s;
      }
  return G;
}

/// Spray from the Euler-Lagrange equations of L = a_ij y^i y^j / 2:
///   a_il (x'' )^l + (d_k a_lj) y^k y^j - 1/2 (d_l a_jk) y^j y^k = 0,  G = -x''/2.
inline Vec<double> fd_spray(const MetricField& a, const Point& x, const TangentVector& y) {
  const std::size_t n = x.size();
  const auto da = fd_metric_derivative(a, x);
  Vec<double> rhs(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) s += da[k](l, j) * y[k] * y[j] - 0.5 * da[l](j, k) * y[j] * y[k];
    rhs[l] = s;
  }
  Vec<double> G = matvec(inverse(a(x)), rhs);
  for (double& v : G) v *= 0.5;
  return G;
}

/// b_{i|j} from finite differences of b and a.
inline Mat<double> fd_covariant(const OneFormField& b, const MetricField& a, const Point& x) {
  const std::size_t n = x.size();
  const auto G = fd_christoffel(a, x);
  const Vec<double> bv = b(x);
  Mat<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = fd_step(x[j]);
    Point xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec<double> bp = b(xp), bm = b(xm);
    for (std::size_t i = 0; i < n; ++i) {
      double s = (bp[i] - bm[i]) / (2.0 * h);
      for (std::size_t k = 0; k < n; ++k) s -= bv[k] * G[(k * n + i) * n + j];
      out(i, j) = s;
    }
  }
  return out;
}

/// Composite Gauss-Legendre (5 points) on [a, b] with m panels.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int m = 64) {
  static const double xs[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                               0.9061798459386640};
  static const double ws[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                               0.2369268850561891};
  const double h = (b - a) / m;
  double total = 0.0;
  for (int p = 0; p < m; ++p) {
    const double c = a + (p + 0.5) * h;
    for (int q = 0; q < 5; ++q) total += ws[q] * f(c + 0.5 * h * xs[q]);
  }
  return 0.5 * h * total;
}

/// Power-series solution of {1+(k1+k3)s^2+k2 s^4} phi'' = (k1+k2 s^2)(phi - s phi')
/// with phi(0)=1, phi'(0)=eps; returns (phi, phi', phi'') at s.
inline Jet2 taylor_phi(const OdeParams& k, double s, int terms = 400) {
  std::vector<double> c(static_cast<std::size_t>(terms) + 2, 0.0);
  c[0] = 1.0;
  c[1] = k.eps;
  const double A = k.k1 + k.k3;
  for (int n = 0; n + 2 < terms; ++n) {
    double v = k.k1 * (1.0 - n) * c[n] - A * n * (n - 1.0) * c[n];
    if (n >= 2) v += k.k2 * (3.0 - n) * c[n - 2] - k.k2 * (n - 2.0) * (n - 3.0) * c[n - 2];
    c[n + 2] = v / ((n + 2.0) * (n + 1.0));
  }
  double p = 0.0, d1 = 0.0, d2 = 0.0;
  for (int n = terms - 1; n >= 0; --n) p = p * s + c[n];
  for (int n = terms - 1; n >= 1; --n) d1 = d1 * s + n * c[n];
  for (int n = terms - 1; n >= 2; --n) d2 = d2 * s + n * (n - 1.0) * c[n];
  return {p, d1, d2};
}

/// Hessian in y of a scalar function by central differences.
inline Mat<double> fd_hessian(const std::function<double(const Vec<double>&)>& f, const Vec<double>& y) {
  const std::size_t n = y.size();
  const double h = 1e-4;
  Mat<double> H(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto at = [&](double si, double sj) {
        Vec<double> z = y;
        z[i] += si * h;
        z[j] += sj * h;
        return f(z);
      };
      H(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
    }
  return H;
}

inline double max_diff(const Mat<double>& a, const Mat<double>& b) { return max_abs(a - b); }

inline double max_diff(const Vec<double>& a, const Vec<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace testing_support
