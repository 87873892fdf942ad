#pragma once

/// @file phi.hpp
/// The function phi(s) of an (alpha,beta)-metric F = alpha * phi(beta/alpha).
///
/// Solutions of
///   {1 + (k1+k3) s^2 + k2 s^4} phi'' = (k1 + k2 s^2) {phi - s phi'}
/// are available in closed form, by quadrature, and as power series.
/// Every PhiSpec is normalized by phi(0) = 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/univariate.hpp"

namespace finslerlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Constants of the second-order equation for phi plus eps = phi'(0).
struct OdeParams {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double eps = 0.0;
  /// Set when the caller requires k2 != k1 k3 (non-Randers use).
  bool non_randers = false;

  double A() const { return k1 + k3; }
  /// 1 + (k1+k3) s^2 + k2 s^4
  double denom(double s) const {
    const double u = s * s;
    return 1.0 + A() * u + k2 * u * u;
  }
  double delta1() const { return A() * A() - 4.0 * k2; }
  /// Absolute threshold below which k2 and Delta1 count as zero.
  double zero_threshold() const {
    const double c = 1.0 + std::abs(k1) + std::abs(k3);
    return 1e-13 * c * c;
  }
  bool k2_is_zero() const { return std::abs(k2) < zero_threshold(); }
  bool randers_degenerate() const { return std::abs(k2 - k1 * k3) < zero_threshold(); }

  void validate() const {
    if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(k3) || !std::isfinite(eps))
      throw Error("ODE parameters must be finite");
    if (non_randers && randers_degenerate())
      throw Error("k2 = k1*k3: the solutions are of Randers type");
  }
};

namespace detail {

/// Smallest positive root of 1 + A t + k2 t^2 (infinity if none).
inline double quadratic_positive_radius(double A, double k2, double thr) {
  if (std::abs(k2) < thr) return A < 0.0 ? -1.0 / A : kInf;
  const double disc = A * A - 4.0 * k2;
  if (disc < 0.0) return kInf;
  const double q = -0.5 * (A + (A >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
  double best = kInf;
  for (double t : {q / k2, 1.0 / q}) {
    if (std::isfinite(t) && t > 0.0) best = std::min(best, t);
  }
  return best;
}

/// log of exp(-1/2 int_0^u (c + k2 t) / (1 + A t + k2 t^2) dt) in closed form.
/// The caller guarantees that the denominator stays positive between 0 and u.
inline double half_exp_log(double c, double A, double k2, double u, double thr) {
  if (std::abs(k2) < thr) {
    if (std::abs(A) < thr) return -0.5 * c * u;
    return -(c / (2.0 * A)) * std::log1p(A * u);
  }
  const double D = 1.0 + A * u + k2 * u * u;
  const double d1 = A * A - 4.0 * k2;
  double J = 0.0;  // int_0^u dt / D(t)
  if (std::abs(d1) < thr) {
    J = u / (1.0 + 0.5 * A * u);
  } else if (d1 > 0.0) {
    const double r = std::sqrt(d1);
    // A - r and A + r without cancellation
    const double m = A > 0.0 ? 4.0 * k2 / (A + r) : A - r;
    const double p = A < 0.0 ? 4.0 * k2 / (A - r) : A + r;
    J = (std::log1p(2.0 * k2 * u / m) - std::log1p(2.0 * k2 * u / p)) / r;
  } else {
    const double r = std::sqrt(-d1);
    J = 2.0 / r * (std::atan((2.0 * k2 * u + A) / r) - std::atan(A / r));
  }
  return -0.25 * std::log(D) - 0.5 * (c - 0.5 * A) * J;
}

inline void require_positive_path(const OdeParams& k, double u, const char* what) {
  const double thr = k.zero_threshold();
  const double lim = u >= 0.0 ? quadratic_positive_radius(k.A(), k.k2, thr)
                              : quadratic_positive_radius(-k.A(), k.k2, thr);
  if (!(std::abs(u) < lim)) {
    std::ostringstream os;
    os << what << ": 1 + (k1+k3) t + k2 t^2 is not positive on [0, " << u << "]";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// Radius R such that 1 + (k1+k3) s^2 + k2 s^4 > 0 for |s| < R.
inline double ode_validity_radius(const OdeParams& k) {
  return std::sqrt(detail::quadratic_positive_radius(k.A(), k.k2, k.zero_threshold()));
}

/// f(s) = phi(s) - s phi'(s) = exp(-int_0^s t(k1+k2t^2)/(1+(k1+k3)t^2+k2t^4) dt),
/// with its first two derivatives.
inline Jet2 f_factor_jet(const OdeParams& k, double s) {
  const double u = s * s;
  detail::require_positive_path(k, u, "f_factor");
  const double f = std::exp(detail::half_exp_log(k.k1, k.A(), k.k2, u, k.zero_threshold()));
  // f'/f = g(s) = -s (k1 + k2 s^2) / D(s)
  auto g = [&k](auto x) {
    auto x2 = x * x;
    return -x * (k.k1 + k.k2 * x2) / (1.0 + k.A() * x2 + k.k2 * x2 * x2);
  };
  const D1 gd = g(D1{s, 1.0});
  return {f, f * gd.v, f * (gd.v * gd.v + gd.d)};
}

inline double f_factor(const OdeParams& k, double s) { return f_factor_jet(k, s).f0; }

/// eta(t) = exp(-int_0^t (k3 + k2 x) / (2 (1 + (k1+k3) x + k2 x^2)) dx), with derivatives.
inline Jet2 eta_jet(const OdeParams& k, double t) {
  detail::require_positive_path(k, t, "eta_factor");
  const double A = k.A();
  const double e = std::exp(detail::half_exp_log(k.k3, A, k.k2, t, k.zero_threshold()));
  const double D = 1.0 + A * t + k.k2 * t * t;
  const double Dp = A + 2.0 * k.k2 * t;
  const double g = -(k.k3 + k.k2 * t) / (2.0 * D);
  const double gp = -(k.k2 * D - (k.k3 + k.k2 * t) * Dp) / (2.0 * D * D);
  return {e, e * g, e * (g * g + gp)};
}

inline double eta_factor(const OdeParams& k, double bbar2) { return eta_jet(k, bbar2).f0; }

/// phi''(s) = (k1 + k2 s^2) / D(s) * f(s).
inline double phi_second_derivative(const OdeParams& k, double s) {
  return (k.k1 + k.k2 * s * s) / k.denom(s) * f_factor(k, s);
}

/// phi, phi', phi'' of the solution with phi(0)=1, phi'(0)=eps:
///   phi'(s) = eps + int_0^s phi''(t) dt,
///   phi(s)  = 1 + eps s + int_0^s (s - t) phi''(t) dt.
/// `tol` bounds the quadrature error estimate.
inline Jet2 phi_from_quadrature(const OdeParams& k, double eps, double s, double tol = 1e-12) {
  if (!(tol > 0.0)) throw Error("quadrature tolerance must be positive");
  detail::require_positive_path(k, s * s, "phi_from_quadrature");
  const double a = std::abs(s);
  const double f2 = phi_second_derivative(k, s);
  if (a == 0.0) return {1.0, eps, f2};
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kMaxDepth = 15;
  double err1 = 0.0, l1a = 0.0, err2 = 0.0, l1b = 0.0;
  // Integrate over u in [0, 1] with t = a u; Boost's error floor is not
  // scaled with the interval, so short intervals would otherwise recurse
  // to full depth.
  const double i1 = a * gauss_kronrod<double, 15>::integrate(
                            [&k, a](double u) { return phi_second_derivative(k, a * u); }, 0.0, 1.0, kMaxDepth, tol,
                            &err1, &l1a);
  const double i2 = a * a * gauss_kronrod<double, 15>::integrate(
                                [&k, a](double u) { return (1.0 - u) * phi_second_derivative(k, a * u); }, 0.0, 1.0,
                                kMaxDepth, tol, &err2, &l1b);
  if (err1 > tol * std::max(1.0, l1a) || err2 > tol * std::max(1.0, l1b)) {
    std::ostringstream os;
    os << "quadrature did not reach tolerance " << tol << " at s=" << s << " (error estimates " << err1 << ", "
       << err2 << ")";
    throw EvaluationError(os.str());
  }
  const double sign = s < 0.0 ? -1.0 : 1.0;
  return {1.0 + eps * s + i2, eps + sign * i1, f2};
}

/// Power series phi_sigma = 1 + eps s + sum_n c_n s^{2n},
/// c_n = prod_{k<=n} (k - sigma - 1)(2k - 3) / (k (2k - 1)).
/// Solves (1 - s^2) phi'' = 2 sigma (phi - s phi').
inline Jet2 phi_series_sigma(double sigma, double eps, double s, double tol = 1e-14) {
  if (!(std::abs(s) < 0.999)) {
    std::ostringstream os;
    os << "phi_sigma series needs |s| < 0.999, got " << s;
    throw DomainError(os.str());
  }
  if (!(tol > 0.0)) throw Error("series tolerance must be positive");
  double f0 = 1.0 + eps * s, f1 = eps, f2 = 0.0;
  double c = 1.0;
  const double s2 = s * s;
  double pw = 1.0;  // s^{2n-2}
  for (int n = 1; n <= 200; ++n) {
    c *= (n - sigma - 1.0) * (2.0 * n - 3.0) / (n * (2.0 * n - 1.0));
    if (c == 0.0) break;
    const double t0 = c * pw * s2;
    const double t1 = 2.0 * n * c * pw * s;
    const double t2 = 2.0 * n * (2.0 * n - 1.0) * c * pw;
    f0 += t0;
    f1 += t1;
    f2 += t2;
    pw *= s2;
    if (std::abs(t0) < tol * std::max(1.0, std::abs(f0)) && std::abs(t1) < tol * std::max(1.0, std::abs(f1)) &&
        std::abs(t2) < tol * std::max(1.0, std::abs(f2)))
      break;
  }
  return {f0, f1, f2};
}

/// r = 0 solutions of (p + r s^2) phi'' = phi - s phi':
/// phi'' = exp(-s^2/(2p)) / p, phi' = eps + int_0^s phi'', phi = exp(-s^2/(2p)) + s phi'.
inline Jet2 phi_series_zero_p(double p, double eps, double s, double tol = 1e-14) {
  if (p == 0.0 || !std::isfinite(p)) throw Error("phi_{0,p} needs a finite nonzero p");
  const double e = std::exp(-s * s / (2.0 * p));
  // int_0^s exp(-t^2/(2p)) dt = sum (-1)^n s^{2n+1} / ((2n+1) n! (2p)^n)
  double term = s;  // (-1)^n s^{2n+1} / (n! (2p)^n)
  double sum = s;
  bool converged = false;
  for (int n = 1; n <= 200; ++n) {
    term *= -s * s / (2.0 * p * n);
    const double add = term / (2.0 * n + 1.0);
    sum += add;
    if (std::abs(add) < tol * std::max(1.0, std::abs(sum))) {
      converged = true;
      break;
    }
  }
  if (!converged && s != 0.0) throw EvaluationError("phi_{0,p} series did not converge in 200 terms");
  const double d1 = eps + sum / p;
  return {e + s * d1, d1, e / p};
}

/// Exact rational number, kept in lowest terms with a positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {  // NOLINT(google-explicit-constructor)
    if (d == 0) throw Error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

/// The closed-form family phi_{r,p} solving (p + r s^2) phi'' = phi - s phi'.
enum class FamilyShape { ZeroR, EvenNeg, EvenAtan, EvenLog, OddAsinh, OddArcsin, OddRational };

struct FamilyMatch {
  FamilyShape shape = FamilyShape::ZeroR;
  int n = 0;         ///< index in the family
  double delta = 1;  ///< sign parameter where the family has one
};

/// Identifies which closed form (r, p) belongs to; throws if none does.
inline FamilyMatch match_family(const Rational& r, const Rational& p) {
  if (p.num == 0) throw Error("explicit family needs p != 0");
  if (r.num == 0) return {FamilyShape::ZeroR, 0, 1.0};
  const bool unit = (r.num == 1 || r.num == -1) && (p.num == 1 || p.num == -1) && r.den == p.den;
  if (unit && r.den <= 1'000'000) {
    const std::int64_t m = r.den;
    const double d = static_cast<double>(p.num);
    if (m % 2 == 0) {
      const int n = static_cast<int>(m / 2);
      if (r.num == -1) return {FamilyShape::EvenNeg, n, d};
      return {p.num == 1 ? FamilyShape::EvenAtan : FamilyShape::EvenLog, n, 1.0};
    }
    const int n = static_cast<int>((m + 1) / 2);
    if (r.num == -1) return {p.num == -1 ? FamilyShape::OddAsinh : FamilyShape::OddArcsin, n, 1.0};
    if (n >= 2) return {FamilyShape::OddRational, n, d};
  }
  throw Error("no closed-form family for (r, p) = (" + r.str() + ", " + p.str() + "); use quadrature");
}

namespace detail {

inline double dfact(int k) {
  double v = 1.0;
  for (int i = k; i > 1; i -= 2) v *= i;
  return v;
}

inline double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

template <class T>
T family_value(const FamilyMatch& m, double eps, const T& s) {
  using std::asin;
  using std::atan;
  using std::log;
  using std::pow;
  using std::sqrt;
  const int n = m.n;
  const double d = m.delta;
  const T s2 = s * s;
  switch (m.shape) {
    case FamilyShape::EvenNeg: {
      T acc = T(0.0);
      T pw = s2;
      for (int j = 0; j < n; ++j) {
        const double c = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(d, j + 1) * binom(n - 1, j) /
                         ((2.0 * j + 2.0) * (2.0 * j + 1.0));
        acc = acc + c * pw;
        pw = pw * s2;
      }
      return 1.0 + eps * s + 2.0 * n * acc;
    }
    case FamilyShape::EvenAtan:
    case FamilyShape::EvenLog:
    case FamilyShape::OddAsinh:
    case FamilyShape::OddArcsin: {
      const double C = dfact(2 * n - 1) / dfact(2 * n - 2);
      T head;
      T base;  // argument raised to the powers in the finite sum
      double expo_sign;
      double half;
      switch (m.shape) {
        case FamilyShape::EvenAtan:
          head = 1.0 + s * atan(s);
          base = 1.0 + s2;
          expo_sign = -1.0;
          half = 0.0;
          break;
        case FamilyShape::EvenLog:
          head = 1.0 + 0.5 * s * log((1.0 - s) / (1.0 + s));
          base = 1.0 - s2;
          expo_sign = -1.0;
          half = 0.0;
          break;
        case FamilyShape::OddAsinh:
          head = sqrt(1.0 + s2) - s * log(s + sqrt(1.0 + s2));
          base = 1.0 + s2;
          expo_sign = 1.0;
          half = 0.5;
          break;
        default:
          head = sqrt(1.0 - s2) + s * asin(s);
          base = 1.0 - s2;
          expo_sign = 1.0;
          half = 0.5;
          break;
      }
      T acc = T(0.0);
      for (int k = 1; k < n; ++k) {
        const double c = dfact(2 * n - 1) * dfact(2 * k - 2) / (dfact(2 * n - 2) * dfact(2 * k + 1));
        acc = acc + c * pow(base, expo_sign * (k + half));
      }
      return eps * s + C * head - acc;
    }
    case FamilyShape::OddRational: {
      const double C = dfact(2 * n - 2) / dfact(2 * n - 3);
      const T base = 1.0 + d * s2;
      T acc = T(0.0);
      for (int k = 2; k < n; ++k) {
        const double c = dfact(2 * n - 2) * dfact(2 * k - 3) / (dfact(2 * n - 3) * dfact(2 * k));
        acc = acc + c * pow(base, -(2.0 * k - 1.0) / 2.0);
      }
      return eps * s + C * (1.0 + 2.0 * d * s2) / (2.0 * sqrt(base)) - acc;
    }
    case FamilyShape::ZeroR:
      break;
  }
  throw Error("family_value: shape has no closed form");
}

}  // namespace detail

/// ODE constants of phi_{r,p}: k1 = 1/p, k2 = 0, k3 = (r-1)/p.
inline OdeParams family_ode_params(const Rational& r, const Rational& p, double eps) {
  const double pv = p.value();
  return OdeParams{1.0 / pv, 0.0, (r.value() - 1.0) / pv, eps};
}

/// phi_{r,p}, phi', phi'' at s. For r = 0 the series phi_{0,p} is used.
inline Jet2 phi_explicit_family(const Rational& r, const Rational& p, double eps, double s) {
  const FamilyMatch m = match_family(r, p);
  if (m.shape == FamilyShape::ZeroR) return phi_series_zero_p(p.value(), eps, s);
  const double rad = std::sqrt(detail::quadratic_positive_radius(r.value() / p.value(), 0.0, 1e-300));
  if (!(std::abs(s) < rad)) throw DomainError("phi_{r,p}: s outside the interval where p + r s^2 keeps its sign");
  return jet_of([&](auto x) { return detail::family_value(m, eps, x); }, s);
}

enum class PhiVariant { NamedClosedForm, OdeQuadrature, PowerSeriesSigma, PowerSeriesZeroP, ExplicitFamily, Derived };

inline const char* to_string(PhiVariant v) {
  switch (v) {
    case PhiVariant::NamedClosedForm: return "named";
    case PhiVariant::OdeQuadrature: return "quadrature";
    case PhiVariant::PowerSeriesSigma: return "series_sigma";
    case PhiVariant::PowerSeriesZeroP: return "series_zero_p";
    case PhiVariant::ExplicitFamily: return "explicit_family";
    case PhiVariant::Derived: return "derived";
  }
  return "unknown";
}

class PhiSpec;
double estimate_b0(const PhiSpec& phi, int grid = 400, double cap = 4.0);

/// A normalized phi with phi, phi', phi'' on the symmetric open interval
/// (-validity_radius, validity_radius).
class PhiSpec {
 public:
  PhiSpec() = default;
  PhiSpec(PhiVariant variant, std::string name, Univariate fn, std::optional<OdeParams> ode = std::nullopt)
      : variant_(variant), name_(std::move(name)), fn_(std::move(fn)), ode_(ode), cache_(std::make_shared<Cache>()) {}

  PhiVariant variant() const { return variant_; }
  const std::string& name() const { return name_; }
  const std::optional<OdeParams>& ode() const { return ode_; }
  const Univariate& function() const { return fn_; }
  double validity_radius() const { return fn_.upper(); }
  bool contains(double s) const { return fn_.contains(s); }

  Jet2 jet(double s) const { return fn_.jet(s); }
  double operator()(double s) const { return fn_(s); }
  double d1(double s) const { return fn_.d1(s); }
  double d2(double s) const { return fn_.d2(s); }
  double eps() const { return fn_.d1(0.0); }

  template <class T>
  T eval(const T& s) const {
    return fn_.eval(s);
  }

  /// Largest b for which the Finsler condition was verified on a grid
  /// (capped at 4). Computed on first use.
  double b0() const {
    if (!cache_) throw Error("empty PhiSpec");
    std::call_once(cache_->once, [this] { cache_->b0 = estimate_b0(*this); });
    return cache_->b0;
  }

 private:
  struct Cache {
    std::once_flag once;
    double b0 = 0.0;
  };
  PhiVariant variant_ = PhiVariant::NamedClosedForm;
  std::string name_;
  Univariate fn_;
  std::optional<OdeParams> ode_;
  std::shared_ptr<Cache> cache_;
};

/// phi from a generic callable (double/D1/D2) on (-radius, radius).
template <class Fn>
PhiSpec phi_closed_form(std::string name, Fn fn, double radius = kInf, std::optional<OdeParams> ode = std::nullopt,
                        PhiVariant variant = PhiVariant::NamedClosedForm) {
  return PhiSpec(variant, std::move(name), Univariate::from_generic(std::move(fn), -radius, radius), ode);
}

/// phi = 1 (Riemannian).
inline PhiSpec phi_riemannian() {
  return phi_closed_form("1", [](auto) { return 1.0; }, kInf, OdeParams{0, 0, 0, 0});
}

/// phi = 1 + eps s (Randers).
inline PhiSpec phi_randers(double eps = 1.0) {
  return phi_closed_form(
      "1+eps*s", [eps](auto s) { return 1.0 + eps * s; }, kInf, OdeParams{0, 0, 0, eps});
}

/// phi = (1 + s)^2, i.e. F = (alpha + beta)^2 / alpha.
inline PhiSpec phi_berwald() {
  return phi_closed_form(
      "(1+s)^2", [](auto s) { return (1.0 + s) * (1.0 + s); }, kInf, OdeParams{2, 0, -3, 2});
}

/// phi = (sqrt(1+s^2) + s)^2 / sqrt(1+s^2).
inline PhiSpec phi_berwald_shifted() {
  return phi_closed_form(
      "(sqrt(1+s^2)+s)^2/sqrt(1+s^2)",
      [](auto s) {
        using std::sqrt;
        auto q = sqrt(1.0 + s * s);
        return (q + s) * (q + s) / q;
      },
      kInf, OdeParams{3, 0, -2, 2});
}

/// phi = 1 + s^2.
inline PhiSpec phi_plus_square() {
  return phi_closed_form("1+s^2", [](auto s) { return 1.0 + s * s; }, kInf, OdeParams{2, 0, -3, 0});
}

/// phi = 1 - s^2.
inline PhiSpec phi_minus_square() {
  return phi_closed_form("1-s^2", [](auto s) { return 1.0 - s * s; }, kInf, OdeParams{-2, 0, 3, 0});
}

inline PhiSpec phi_quadrature(const OdeParams& k, double tol = 1e-12) {
  k.validate();
  const double R = ode_validity_radius(k);
  std::ostringstream name;
  name.precision(17);
  name << "quadrature(k1=" << k.k1 << ",k2=" << k.k2 << ",k3=" << k.k3 << ",eps=" << k.eps << ")";
  return PhiSpec(PhiVariant::OdeQuadrature, name.str(),
                 Univariate([k, tol](double s) { return phi_from_quadrature(k, k.eps, s, tol); }, -R, R), k);
}

/// phi_sigma, a solution with k = (2 sigma, 0, -2 sigma - 1).
inline PhiSpec phi_sigma(double sigma, double eps, double tol = 1e-14) {
  std::ostringstream name;
  name.precision(17);
  name << "phi_sigma(sigma=" << sigma << ",eps=" << eps << ")";
  return PhiSpec(PhiVariant::PowerSeriesSigma, name.str(),
                 Univariate([sigma, eps, tol](double s) { return phi_series_sigma(sigma, eps, s, tol); }, -0.999,
                            0.999),
                 OdeParams{2.0 * sigma, 0.0, -2.0 * sigma - 1.0, eps});
}

/// phi_{0,p}, a solution with k = (1/p, 0, -1/p).
inline PhiSpec phi_zero_p(double p, double eps, double tol = 1e-14) {
  if (p == 0.0) throw Error("phi_{0,p} needs p != 0");
  std::ostringstream name;
  name.precision(17);
  name << "phi_{0,p}(p=" << p << ",eps=" << eps << ")";
  return PhiSpec(PhiVariant::PowerSeriesZeroP, name.str(),
                 Univariate([p, eps, tol](double s) { return phi_series_zero_p(p, eps, s, tol); }),
                 OdeParams{1.0 / p, 0.0, -1.0 / p, eps});
}

inline PhiSpec phi_family(const Rational& r, const Rational& p, double eps) {
  const FamilyMatch m = match_family(r, p);
  if (m.shape == FamilyShape::ZeroR) return phi_zero_p(p.value(), eps);
  const double R = std::sqrt(detail::quadratic_positive_radius(r.value() / p.value(), 0.0, 1e-300));
  std::ostringstream name;
  name.precision(17);
  name << "phi_{" << r.str() << "," << p.str() << "}(eps=" << eps << ")";
  return PhiSpec(PhiVariant::ExplicitFamily, name.str(),
                 Univariate::from_generic([m, eps](auto s) { return detail::family_value(m, eps, s); }, -R, R),
                 family_ode_params(r, p, eps));
}

/// {1+(k1+k3)s^2+k2 s^4} phi'' - (k1 + k2 s^2) {phi - s phi'}.
inline double ode_residual(const PhiSpec& phi, const OdeParams& k, double s) {
  const Jet2 j = phi.jet(s);
  return k.denom(s) * j.f2 - (k.k1 + k.k2 * s * s) * (j.f0 - s * j.f1);
}

struct RegularityReport {
  double b0_max = 0.0;      ///< largest grid b with the condition verified
  double min_margin = 0.0;  ///< min of phi - s phi' + (b^2 - s^2) phi'' over |s| <= b <= b0
  double min_phi = 0.0;     ///< min of phi over the grid
  double min_ode = kInf;    ///< min of 1 + k1 s^2 and 1 + (k1+k3) s^2 + k2 s^4 (when constants are known)
  bool pass = false;
};

namespace detail {

struct GridSample {
  double s, phi, f, f2, ode;
};

inline std::vector<GridSample> sample_grid(const PhiSpec& phi, double b0, int grid) {
  std::vector<GridSample> out;
  out.reserve(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double s = -b0 + 2.0 * b0 * i / (grid - 1);
    const Jet2 j = phi.jet(s);
    double ode = kInf;
    if (phi.ode()) ode = std::min(1.0 + phi.ode()->k1 * s * s, phi.ode()->denom(s));
    out.push_back({s, j.f0, j.f0 - s * j.f1, j.f2, ode});
  }
  return out;
}

inline bool sample_ok(const GridSample& g, double b) {
  return g.phi > 0.0 && g.ode > 0.0 && g.f > 0.0 && g.f + (b * b - g.s * g.s) * g.f2 > 0.0;
}

}  // namespace detail

/// Checks phi - s phi' + (b^2 - s^2) phi'' > 0 for |s| <= b <= b0 on a grid
/// of s values, together with phi > 0 and, when phi carries ODE constants,
/// 1 + k1 s^2 > 0 and 1 + (k1+k3) s^2 + k2 s^4 > 0. The expression is linear
/// in b^2, so for each s only b = |s| and b = b0 need checking.
inline RegularityReport regularity_check(const PhiSpec& phi, double b0, int grid = 201) {
  if (!(b0 > 0.0)) throw Error("regularity_check needs b0 > 0");
  if (grid < 2) throw Error("regularity_check needs at least 2 grid points");
  const auto samples = detail::sample_grid(phi, b0, grid);
  RegularityReport rep;
  rep.min_margin = kInf;
  rep.min_phi = kInf;
  for (const auto& g : samples) {
    rep.min_margin = std::min({rep.min_margin, g.f, g.f + (b0 * b0 - g.s * g.s) * g.f2});
    rep.min_phi = std::min(rep.min_phi, g.phi);
    rep.min_ode = std::min(rep.min_ode, g.ode);
  }
  rep.pass = rep.min_margin > 0.0 && rep.min_phi > 0.0 && rep.min_ode > 0.0;
  if (rep.pass) {
    rep.b0_max = b0;
  } else {
    std::vector<double> bs;
    for (const auto& g : samples) bs.push_back(std::abs(g.s));
    std::sort(bs.begin(), bs.end());
    for (double b : bs) {
      const bool ok = std::all_of(samples.begin(), samples.end(), [b](const detail::GridSample& g) {
        return std::abs(g.s) > b || detail::sample_ok(g, b);
      });
      if (!ok) break;
      rep.b0_max = b;
    }
  }
  return rep;
}

/// Largest grid value b <= min(cap, radius) such that the Finsler condition
/// holds for all |s| <= b. The grid grows outwards from s = 0 and stops at
/// the first failure, including a failed evaluation of phi.
inline double estimate_b0(const PhiSpec& phi, int grid, double cap) {
  const double R = phi.validity_radius();
  const double bmax = std::min(cap, std::isfinite(R) ? R * (1.0 - 1e-9) : cap);
  auto at = [&](double s) {
    const Jet2 j = phi.jet(s);
    double ode = kInf;
    if (phi.ode()) ode = std::min(1.0 + phi.ode()->k1 * s * s, phi.ode()->denom(s));
    return detail::GridSample{s, j.f0, j.f0 - s * j.f1, j.f2, ode};
  };
  std::vector<detail::GridSample> seen;
  double best = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double b = bmax * i / grid;
    try {
      seen.push_back(at(b));
      if (i > 0) seen.push_back(at(-b));
    } catch (const Error&) {
      break;
    }
    const bool ok = std::all_of(seen.begin(), seen.end(), [b](const detail::GridSample& g) { return detail::sample_ok(g, b); });
    if (!ok) break;
    best = b;
  }
  return best;
}

}  // namespace finslerlab
