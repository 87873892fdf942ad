#pragma once

/// @file deform.hpp
/// beta-deformations of a pair (alpha, beta):
///   stretch    a~ = a - kappa(b^2) b b,   beta~ = beta
///   conformal  a^ = e^{2 rho(b^2)} a,     beta^ = beta
///   rescale    a- = a,                    beta- = nu(b^2) beta
/// with the factor choices that carry a projectively flat (alpha,beta)-metric
/// to a projectively flat alpha- and a closed conformal beta-, and back.
///
/// In a chain every factor is evaluated at b^2 of the pair the chain started
/// from; the single-step functions take that norm as an optional argument.

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "finslerlab/diffgeo.hpp"
#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"
#include "finslerlab/phi.hpp"
#include "finslerlab/univariate.hpp"

namespace finslerlab {

/// A smooth function of t = b^2.
using ScalarFactor = Univariate;

struct FieldPair {
  MetricField a;
  OneFormField b;
};

namespace detail {

template <class T>
T squared_norm(const Mat<T>& a, const Vec<T>& b) {
  return bilinear(inverse(a), b, b);
}

inline void require_same_domain(const MetricField& a, const OneFormField& b) {
  if (a.dim() != b.dim()) throw Error("metric and 1-form have different dimensions");
}

}  // namespace detail

/// a~_ij = a_ij - kappa(b^2) b_i b_j; beta unchanged.
inline FieldPair deform_stretch(const MetricField& a, const OneFormField& b, const ScalarFactor& kappa,
                                std::optional<ScalarField> norm = std::nullopt) {
  detail::require_same_domain(a, b);
  const ScalarField t = norm ? *norm : squared_norm_field(a, b);
  MetricField at(a.dim(), a.domain_radius(), [a, b, kappa, t](auto x) {
    const auto A = a(x);
    const auto B = b(x);
    const auto tt = t(x);
    const auto k = kappa.eval(tt);
    if (!(value_of(1.0 - k * tt) > 0.0)) throw RegularityError("stretch: 1 - kappa b^2 must stay positive");
    return A - outer(B, B) * k;
  });
  return {std::move(at), b};
}

/// a^_ij = e^{2 rho(b^2)} a_ij; beta unchanged.
inline FieldPair deform_conformal(const MetricField& a, const OneFormField& b, const ScalarFactor& rho,
                                  std::optional<ScalarField> norm = std::nullopt) {
  detail::require_same_domain(a, b);
  const ScalarField t = norm ? *norm : squared_norm_field(a, b);
  MetricField ah(a.dim(), a.domain_radius(), [a, rho, t](auto x) {
    using std::exp;
    return a(x) * exp(2.0 * rho.eval(t(x)));
  });
  return {std::move(ah), b};
}

/// beta- = nu(b^2) beta; metric unchanged.
inline FieldPair deform_rescale(const MetricField& a, const OneFormField& b, const ScalarFactor& nu,
                                std::optional<ScalarField> norm = std::nullopt) {
  detail::require_same_domain(a, b);
  const ScalarField t = norm ? *norm : squared_norm_field(a, b);
  OneFormField bb(b.dim(), b.domain_radius(), [b, nu, t](auto x) {
    const auto v = nu.eval(t(x));
    if (!(value_of(v) > 0.0)) throw RegularityError("rescale: nu must stay positive");
    return scaled(b(x), v);
  });
  return {a, std::move(bb)};
}

enum class ChainDirection { Forward, Inverse };

/// The factor triple together with the constants it was built from.
struct DeformChain {
  ScalarFactor kappa;
  ScalarFactor rho;
  ScalarFactor nu;
  OdeParams params;
  ChainDirection direction = ChainDirection::Forward;
};

namespace detail {

inline std::pair<double, double> factor_interval(const OdeParams& k) {
  const double thr = k.zero_threshold();
  return {-quadratic_positive_radius(-k.A(), k.k2, thr), quadratic_positive_radius(k.A(), k.k2, thr)};
}

template <class T>
T eta_of(const OdeParams& k, const T& t) {
  return lift(eta_jet(k, value_of(t)), t);
}

template <class T>
T chain_denom(const OdeParams& k, const T& t) {
  return 1.0 + k.A() * t + k.k2 * t * t;
}

}  // namespace detail

/// kappa = -(k1 + k3 + k2 t), rho = -ln eta(t), nu = sqrt(1 + (k1+k3) t + k2 t^2) / eta(t).
inline DeformChain standard_factors(const OdeParams& k, ChainDirection direction = ChainDirection::Forward) {
  const auto [lo, hi] = detail::factor_interval(k);
  DeformChain c;
  c.params = k;
  c.direction = direction;
  c.kappa = ScalarFactor::from_generic([k](auto t) { return -(k.A() + k.k2 * t); }, lo, hi);
  c.rho = ScalarFactor::from_generic(
      [k](auto t) {
        using std::log;
        return -log(detail::eta_of(k, t));
      },
      lo, hi);
  c.nu = ScalarFactor::from_generic(
      [k](auto t) {
        using std::sqrt;
        return sqrt(detail::chain_denom(k, t)) / detail::eta_of(k, t);
      },
      lo, hi);
  return c;
}

/// {1 + (k1+k3) t + k2 t^2} kappa' + kappa^2 + (k1+k3) kappa + k2.
inline double kappa_riccati_residual(const OdeParams& k, const ScalarFactor& kappa, double t) {
  const Jet2 j = kappa.jet(t);
  return detail::chain_denom(k, t) * j.f1 + j.f0 * j.f0 + k.A() * j.f0 + k.k2;
}

namespace detail {

template <class T>
T checked_norm_for_chain(const OdeParams& k, const T& t) {
  if (!(value_of(chain_denom(k, t)) > 0.0)) {
    std::ostringstream os;
    os << "1 + (k1+k3) b^2 + k2 b^4 = " << value_of(chain_denom(k, t)) << " is not positive at b^2 = " << value_of(t);
    throw RegularityError(os.str());
  }
  return t;
}

}  // namespace detail

/// Stretch, conformal and rescale steps with the standard factors, all at
/// b^2 of the input pair. The output has the same norm: |beta-|_{alpha-} = |beta|_alpha.
inline FieldPair forward_chain(const MetricField& a, const OneFormField& b, const OdeParams& k) {
  detail::require_same_domain(a, b);
  MetricField abar(a.dim(), a.domain_radius(), [a, b, k](auto x) {
    using std::exp;
    const auto A = a(x);
    const auto B = b(x);
    const auto t = detail::checked_norm_for_chain(k, detail::squared_norm(A, B));
    const auto eta = detail::eta_of(k, t);
    const auto kappa = -(k.A() + k.k2 * t);
    return (A - outer(B, B) * kappa) * (1.0 / (eta * eta));
  });
  OneFormField bbar(b.dim(), b.domain_radius(), [a, b, k](auto x) {
    using std::sqrt;
    const auto A = a(x);
    const auto B = b(x);
    const auto t = detail::checked_norm_for_chain(k, detail::squared_norm(A, B));
    return scaled(B, sqrt(detail::chain_denom(k, t)) / detail::eta_of(k, t));
  });
  return {std::move(abar), std::move(bbar)};
}

/// Closed-form inverse of forward_chain with t = |beta-|^2_{alpha-}:
///   a = eta(t)^2 (a- - (k1+k3+k2 t)/(1+(k1+k3)t+k2t^2) b- b-),
///   b = eta(t) / sqrt(1+(k1+k3)t+k2t^2) b-.
inline FieldPair inverse_chain(const MetricField& abar, const OneFormField& bbar, const OdeParams& k) {
  detail::require_same_domain(abar, bbar);
  MetricField a(abar.dim(), abar.domain_radius(), [abar, bbar, k](auto x) {
    const auto A = abar(x);
    const auto B = bbar(x);
    const auto t = detail::checked_norm_for_chain(k, detail::squared_norm(A, B));
    const auto eta = detail::eta_of(k, t);
    const auto c = (k.A() + k.k2 * t) / detail::chain_denom(k, t);
    return (A - outer(B, B) * c) * (eta * eta);
  });
  OneFormField b(bbar.dim(), bbar.domain_radius(), [abar, bbar, k](auto x) {
    using std::sqrt;
    const auto A = abar(x);
    const auto B = bbar(x);
    const auto t = detail::checked_norm_for_chain(k, detail::squared_norm(A, B));
    return scaled(B, detail::eta_of(k, t) / sqrt(detail::chain_denom(k, t)));
  });
  return {std::move(a), std::move(b)};
}

/// Applies the chain in its recorded direction.
inline FieldPair apply_chain(const DeformChain& chain, const MetricField& a, const OneFormField& b) {
  return chain.direction == ChainDirection::Forward ? forward_chain(a, b, chain.params)
                                                    : inverse_chain(a, b, chain.params);
}

/// The two-step chain for F = (alpha+beta)^2/alpha: forward a^ = (1-b^2)^2 a,
/// beta- = sqrt(1-b^2) beta; inverse a = (1+b-^2)^2 a-, beta = sqrt(1+b-^2) beta-.
/// The norms satisfy (1 - b^2)(1 + b-^2) = 1.
inline FieldPair berwald_chain(const MetricField& a, const OneFormField& b, ChainDirection direction) {
  detail::require_same_domain(a, b);
  const double sgn = direction == ChainDirection::Forward ? -1.0 : 1.0;
  auto factor = [sgn](const auto& t) {
    if (!(value_of(1.0 + sgn * t) > 0.0)) throw DomainError("berwald_chain: forward direction needs b < 1");
    return 1.0 + sgn * t;
  };
  MetricField am(a.dim(), a.domain_radius(), [a, b, factor](auto x) {
    const auto A = a(x);
    const auto f = factor(detail::squared_norm(A, b(x)));
    return A * (f * f);
  });
  OneFormField bm(b.dim(), b.domain_radius(), [a, b, factor](auto x) {
    using std::sqrt;
    const auto B = b(x);
    return scaled(B, sqrt(factor(detail::squared_norm(a(x), B))));
  });
  return {std::move(am), std::move(bm)};
}

/// Transformed spray and covariant derivative predicted from the data of
/// the original pair.
struct DeformPrediction {
  Vec<double> G;
  Mat<double> bij;
};

/// Stretch step: prediction of G~ and b~_{i|j} from (a, b), kappa and kappa'.
inline DeformPrediction predict_stretch(const CovariantData& cd, const TangentVector& y, double kappa, double dkappa) {
  const std::size_t n = cd.dim();
  const double b2 = cd.b2;
  const double m = 1.0 - kappa * b2;
  const double be = cd.beta(y);
  const double r00 = cd.r00(y), r0 = cd.r0(y), s0 = cd.s0(y), r = cd.r;
  const Vec<double> si0 = cd.s_up0(y), ru = cd.r_up(), su = cd.s_up();
  DeformPrediction p;
  p.G = cd.spray_alpha(y);
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = cd.b_up[i];
    p.G[i] += -kappa / (2.0 * m) * (2.0 * m * be * si0[i] + r00 * bi + 2.0 * kappa * s0 * be * bi) +
              dkappa / (2.0 * m) * (m * be * be * (ru[i] + su[i]) + kappa * r * be * be * bi - 2.0 * (r0 + s0) * be * bi);
  }
  p.bij = cd.bij;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double bi = cd.b[i], bj = cd.b[j];
      p.bij(i, j) += kappa / m * (b2 * cd.rij(i, j) + bi * cd.s_i[j] + bj * cd.s_i[i]) -
                     dkappa / m * (r * bi * bj - b2 * bi * (cd.r_i[j] + cd.s_i[j]) - b2 * bj * (cd.r_i[i] + cd.s_i[i]));
    }
  return p;
}

/// Conformal step after a stretch with factor kappa (kappa = 0 for a bare
/// conformal change): prediction of G^ and b^_{i|j} from G~, b~_{i|j}.
inline DeformPrediction predict_conformal(const CovariantData& cd, const TangentVector& y, const DeformPrediction& tilde,
                                          double kappa, double drho) {
  const std::size_t n = cd.dim();
  const double m = 1.0 - kappa * cd.b2;
  const double be = cd.beta(y);
  const double a2 = cd.alpha2(y);
  const double r0 = cd.r0(y), s0 = cd.s0(y), r = cd.r;
  const Vec<double> ru = cd.r_up(), su = cd.s_up();
  DeformPrediction p = tilde;
  for (std::size_t i = 0; i < n; ++i) {
    p.G[i] += drho * (2.0 * (r0 + s0) * y[i] - (a2 - kappa * be * be) * (ru[i] + su[i] + kappa / m * r * cd.b_up[i]));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double bi = cd.b[i], bj = cd.b[j];
      p.bij(i, j) -= 2.0 * drho *
                     (bi * (cd.r_i[j] + cd.s_i[j]) + bj * (cd.r_i[i] + cd.s_i[i]) -
                      r * (cd.a(i, j) - kappa * bi * bj) / m);
    }
  return p;
}

/// Rescale step: G- = G^, b-_{i|j} = nu b^_{i|j} + 2 nu' b_i (r_j + s_j).
inline DeformPrediction predict_rescale(const CovariantData& cd, const DeformPrediction& hat, double nu, double dnu) {
  const std::size_t n = cd.dim();
  DeformPrediction p = hat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p.bij(i, j) = nu * hat.bij(i, j) + 2.0 * dnu * cd.b[i] * (cd.r_i[j] + cd.s_i[j]);
  return p;
}

}  // namespace finslerlab
