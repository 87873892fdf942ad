#pragma once

/// @file dual.hpp
/// Forward-mode differentiation on nested dual numbers.
///
/// `Dual<double>` carries one directional derivative, `Dual<Dual<double>>`
/// carries two directions and their mixed second derivative. Every field in
/// the library is written as a template over its scalar type so the same
/// code yields values, gradients and mixed second derivatives.

#include <cmath>
#include <type_traits>

#include "finslerlab/errors.hpp"

namespace finslerlab {

template <class T>
struct Dual {
  T v{};  ///< value part
  T d{};  ///< derivative part

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}

  constexpr Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  constexpr Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  constexpr Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  constexpr Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
  friend constexpr Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }

  friend constexpr Dual operator+(const Dual& a, double c) { return {a.v + c, a.d}; }
  friend constexpr Dual operator+(double c, const Dual& a) { return {c + a.v, a.d}; }
  friend constexpr Dual operator-(const Dual& a, double c) { return {a.v - c, a.d}; }
  friend constexpr Dual operator-(double c, const Dual& a) { return {c - a.v, -a.d}; }
  friend constexpr Dual operator*(const Dual& a, double c) { return {a.v * c, a.d * c}; }
  friend constexpr Dual operator*(double c, const Dual& a) { return {c * a.v, c * a.d}; }
  friend constexpr Dual operator/(const Dual& a, double c) { return {a.v / c, a.d / c}; }
  friend constexpr Dual operator/(double c, const Dual& a) {
    T q = c / a.v;
    return {q, -q * a.d / a.v};
  }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Nesting depth: 0 for double, 1 for D1, 2 for D2.
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

/// Strips every derivative part.
constexpr double value_of(double x) { return x; }
template <class T>
constexpr double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
constexpr bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T>
constexpr bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T>
constexpr bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T>
constexpr bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }
template <class T>
constexpr bool operator<=(const Dual<T>& a, double b) { return value_of(a) <= b; }
template <class T>
constexpr bool operator>=(const Dual<T>& a, double b) { return value_of(a) >= b; }

// Elementary functions. Generic code calls these unqualified after
// `using std::sqrt;` etc. so that doubles and duals resolve alike.

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  T r = sqrt(x.v);
  return {r, x.d / (2.0 * r)};
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  T e = exp(x.v);
  return {e, e * x.d};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  using std::log;
  return {log(x.v), x.d / x.v};
}

template <class T>
Dual<T> log1p(const Dual<T>& x) {
  using std::log1p;
  return {log1p(x.v), x.d / (1.0 + x.v)};
}

template <class T>
Dual<T> pow(const Dual<T>& x, double p) {
  using std::pow;
  T xp1 = pow(x.v, p - 1.0);
  return {xp1 * x.v, p * xp1 * x.d};
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {sin(x.v), cos(x.v) * x.d};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {cos(x.v), -sin(x.v) * x.d};
}

template <class T>
Dual<T> atan(const Dual<T>& x) {
  using std::atan;
  return {atan(x.v), x.d / (1.0 + x.v * x.v)};
}

template <class T>
Dual<T> asin(const Dual<T>& x) {
  using std::asin;
  using std::sqrt;
  return {asin(x.v), x.d / sqrt(1.0 - x.v * x.v)};
}

template <class T>
Dual<T> abs(const Dual<T>& x) {
  return value_of(x) < 0.0 ? -x : x;
}

/// Value and first two derivatives of a univariate function at a point.
struct Jet2 {
  double f0 = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;

  double operator[](int k) const {
    switch (k) {
      case 0: return f0;
      case 1: return f1;
      case 2: return f2;
      default: throw EvaluationError("Jet2: derivative order above 2 requested");
    }
  }
};

namespace detail {

template <class T>
T jet_at(const Jet2& j, int k, const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return j[k];
  } else {
    return T{jet_at(j, k, x.v), jet_at(j, k + 1, x.v) * x.d};
  }
}

}  // namespace detail

/// Composes a univariate function, known through its jet at value_of(x),
/// with a (possibly dual) argument x. Exact up to nesting depth 2.
template <class T>
T lift(const Jet2& jet_at_base, const T& x) {
  static_assert(dual_depth<T>::value <= 2, "lift supports at most two nested duals");
  return detail::jet_at(jet_at_base, 0, x);
}

/// Jet of a generic callable f at s via one second-order dual evaluation.
template <class Fn>
Jet2 jet_of(Fn&& f, double s) {
  D2 arg{D1{s, 1.0}, D1{1.0, 0.0}};
  D2 r = f(arg);
  return {r.v.v, r.v.d, r.d.d};
}

}  // namespace finslerlab
