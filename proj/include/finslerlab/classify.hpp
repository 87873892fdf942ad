#pragma once

/// @file classify.hpp
/// Types of (alpha,beta)-metrics whose phi solves the second-order equation.
///
/// The group generated by
///   g_u: phi(s) -> sqrt(1+u s^2) phi(s / sqrt(1+u s^2)),
///   h_v: phi(s) -> phi(v s),
/// acts on the constants (k1, k2, k3, eps). The pair (p, q) built from
///   D1 = (k1+k3)^2 - 4 k2,  D2 = 4 (k1 k3 - k2),  D3 = k1 - k3
/// is a complete invariant. p = sqrt(D2)/D3 is kept as a tag plus a real
/// coefficient, so no complex arithmetic is needed.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/deform.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/phi.hpp"

namespace finslerlab {

using Quadruple = OdeParams;

/// k1 + u, k2 + (k1+k3) u + u^2, k3 + u; eps unchanged.
inline Quadruple transform_g(double u, const Quadruple& k) {
  Quadruple r = k;
  r.k1 = k.k1 + u;
  r.k3 = k.k3 + u;
  r.k2 = k.k2 + (k.k1 + k.k3) * u + u * u;
  return r;
}

/// v^2 k1, v^4 k2, v^2 k3, v eps.
inline Quadruple transform_h(double v, const Quadruple& k) {
  if (v == 0.0) throw Error("transform_h needs v != 0");
  Quadruple r = k;
  r.k1 = v * v * k.k1;
  r.k2 = v * v * v * v * k.k2;
  r.k3 = v * v * k.k3;
  r.eps = v * k.eps;
  return r;
}

enum class PTag { Zero, FiniteReal, FiniteImag, Inf, ImagInf };
enum class QTag { Zero, Finite, Inf };

inline const char* to_string(PTag t) {
  switch (t) {
    case PTag::Zero: return "zero";
    case PTag::FiniteReal: return "real";
    case PTag::FiniteImag: return "imaginary";
    case PTag::Inf: return "infinity";
    case PTag::ImagInf: return "imaginary_infinity";
  }
  return "unknown";
}

inline const char* to_string(QTag t) {
  switch (t) {
    case QTag::Zero: return "zero";
    case QTag::Finite: return "finite";
    case QTag::Inf: return "infinity";
  }
  return "unknown";
}

/// p = coef for FiniteReal, p = i * coef for FiniteImag.
struct PValue {
  PTag tag = PTag::Zero;
  double coef = 0.0;
  std::string str() const {
    std::ostringstream os;
    os.precision(12);
    switch (tag) {
      case PTag::Zero: return "0";
      case PTag::Inf: return "inf";
      case PTag::ImagInf: return "i*inf";
      case PTag::FiniteReal: os << coef; return os.str();
      case PTag::FiniteImag: os << "i*" << coef; return os.str();
    }
    return "?";
  }
};

struct QValue {
  QTag tag = QTag::Zero;
  double value = 0.0;
  std::string str() const {
    std::ostringstream os;
    os.precision(12);
    switch (tag) {
      case QTag::Zero: return "0";
      case QTag::Inf: return "inf";
      case QTag::Finite: os << value; return os.str();
    }
    return "?";
  }
};

struct InvariantSignature {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  PValue p;
  QValue q;
};

namespace detail {

inline bool near_zero(double x, double scale) { return std::abs(x) <= 1e-12 * scale; }

inline double k_scale(const Quadruple& k) {
  const double s = std::abs(k.k1) + std::abs(k.k3) + std::sqrt(std::abs(k.k2));
  return s * s;
}

inline bool rel_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace detail

inline InvariantSignature invariants(const Quadruple& k) {
  InvariantSignature sig;
  const double A = k.k1 + k.k3;
  sig.d1 = A * A - 4.0 * k.k2;
  sig.d2 = 4.0 * (k.k1 * k.k3 - k.k2);
  sig.d3 = k.k1 - k.k3;
  const double sc = detail::k_scale(k);
  const bool d2zero = detail::near_zero(sig.d2, sc);
  const bool d3zero = detail::near_zero(sig.d3, std::sqrt(sc));
  if (d2zero) {
    sig.p = {PTag::Zero, 0.0};
  } else if (d3zero) {
    sig.p = {sig.d2 > 0.0 ? PTag::Inf : PTag::ImagInf, 0.0};
  } else if (sig.d2 > 0.0) {
    sig.p = {PTag::FiniteReal, std::sqrt(sig.d2) / sig.d3};
  } else {
    sig.p = {PTag::FiniteImag, std::sqrt(-sig.d2) / sig.d3};
  }
  if (k.eps == 0.0) {
    sig.q = {QTag::Zero, 0.0};
  } else if (d2zero) {
    sig.q = {QTag::Inf, 0.0};
  } else {
    const double e2 = k.eps * k.eps;
    sig.q = {QTag::Finite, e2 * e2 / sig.d2};
  }
  return sig;
}

inline bool same_p(const PValue& a, const PValue& b, double rel = 1e-9) {
  if (a.tag != b.tag) return false;
  if (a.tag == PTag::FiniteReal || a.tag == PTag::FiniteImag) return detail::rel_equal(a.coef, b.coef, rel);
  return true;
}

inline bool same_q(const QValue& a, const QValue& b, double rel = 1e-9) {
  if (a.tag != b.tag) return false;
  return a.tag != QTag::Finite || detail::rel_equal(a.value, b.value, rel);
}

/// Same type iff the (p, q) invariants agree (tags exactly, values to `rel`).
inline bool same_type(const Quadruple& a, const Quadruple& b, double rel = 1e-9) {
  const InvariantSignature sa = invariants(a), sb = invariants(b);
  return same_p(sa.p, sb.p, rel) && same_q(sa.q, sb.q, rel);
}

/// The three one-parameter normal forms:
///   D1p: (1 - s^2) phi'' = 2 sigma (phi - s phi'),           k = (2 sigma, 0, -2 sigma - 1)
///   D1z: phi'' = 2 sigma (phi - s phi'), sigma = +-1,         k = (2 sigma, 0, -2 sigma)
///   D1n: (1 + 2 sigma s^2 + s^4) phi'' = s^2 (phi - s phi'),  k = (0, 1, 2 sigma)
enum class ReducedKind { D1p, D1z, D1n };

inline const char* to_string(ReducedKind k) {
  switch (k) {
    case ReducedKind::D1p: return "D1p";
    case ReducedKind::D1z: return "D1z";
    case ReducedKind::D1n: return "D1n";
  }
  return "unknown";
}

struct ReducedForm {
  ReducedKind kind = ReducedKind::D1p;
  double sigma = 1.0;

  void validate() const {
    switch (kind) {
      case ReducedKind::D1p:
        if (sigma == 0.0 || sigma == -0.5) throw Error("D1p needs sigma != 0, -1/2");
        break;
      case ReducedKind::D1z:
        if (sigma != 1.0 && sigma != -1.0) throw Error("D1z needs sigma = +-1");
        break;
      case ReducedKind::D1n:
        if (!(std::abs(sigma) < 1.0)) throw Error("D1n needs |sigma| < 1");
        break;
    }
  }
};

/// Constants of a normal form with the given eps.
inline Quadruple reduced_quadruple(const ReducedForm& f, double eps = 0.0) {
  switch (f.kind) {
    case ReducedKind::D1p: return {2.0 * f.sigma, 0.0, -2.0 * f.sigma - 1.0, eps};
    case ReducedKind::D1z: return {2.0 * f.sigma, 0.0, -2.0 * f.sigma, eps};
    case ReducedKind::D1n: return {0.0, 1.0, 2.0 * f.sigma, eps};
  }
  throw Error("unknown reduced form");
}

/// p of a normal form from the closed expressions
///   D1p: 2 sqrt(-2 sigma (2 sigma + 1)) / (4 sigma + 1),  D1z: sqrt(-sigma^2)/sigma,  D1n: -i / sigma.
inline PValue table_p(const ReducedForm& f) {
  const double s = f.sigma;
  switch (f.kind) {
    case ReducedKind::D1p: {
      const double rad = -2.0 * s * (2.0 * s + 1.0);
      const double den = 4.0 * s + 1.0;
      if (den == 0.0) return {rad > 0.0 ? PTag::Inf : PTag::ImagInf, 0.0};
      if (rad > 0.0) return {PTag::FiniteReal, 2.0 * std::sqrt(rad) / den};
      return {PTag::FiniteImag, 2.0 * std::sqrt(-rad) / den};
    }
    case ReducedKind::D1z: return {PTag::FiniteImag, s > 0.0 ? 1.0 : -1.0};
    case ReducedKind::D1n:
      if (s == 0.0) return {PTag::ImagInf, 0.0};
      return {PTag::FiniteImag, -1.0 / s};
  }
  throw Error("unknown reduced form");
}

/// Whether p lies in the range listed for its normal form:
/// D1p: R\{0} u {inf} u i(-1,1); D1z: {+-i}; D1n: i(-inf,-1) u i(1,inf) u {i inf}.
inline bool p_in_range(const ReducedForm& f, const PValue& p) {
  switch (f.kind) {
    case ReducedKind::D1p:
      return (p.tag == PTag::FiniteReal && p.coef != 0.0) || p.tag == PTag::Inf ||
             (p.tag == PTag::FiniteImag && std::abs(p.coef) < 1.0);
    case ReducedKind::D1z: return p.tag == PTag::FiniteImag && std::abs(std::abs(p.coef) - 1.0) < 1e-12;
    case ReducedKind::D1n: return p.tag == PTag::ImagInf || (p.tag == PTag::FiniteImag && std::abs(p.coef) > 1.0);
  }
  return false;
}

struct Reduction {
  ReducedForm form;
  double u = 0.0;   ///< g_u applied first
  double v = 1.0;   ///< then h_v
  Quadruple reduced;  ///< transform_h(v, transform_g(u, k))
};

/// Normal form of k and the (u, v) that carries k to it. Requires D2 != 0.
inline Reduction reduce(const Quadruple& k) {
  const InvariantSignature sig = invariants(k);
  if (sig.p.tag == PTag::Zero) throw Error("reduce: D2 = 0 (Randers or Riemannian), no normal form");
  const double A = k.k1 + k.k3;
  const double thr = k.zero_threshold();
  Reduction r;
  if (std::abs(sig.d1) < thr) {
    r.u = -A / 2.0;
    r.form = {ReducedKind::D1z, sig.d3 > 0.0 ? 1.0 : -1.0};
    r.v = std::sqrt(4.0 / std::abs(sig.d3));
  } else if (sig.d1 > 0.0) {
    const double q = std::sqrt(sig.d1);
    r.u = (-A - q) / 2.0;
    r.v = std::pow(sig.d1, -0.25);
    r.form = {ReducedKind::D1p, (sig.d3 / q - 1.0) / 4.0};
  } else {
    r.u = -k.k1;
    r.v = std::pow(-sig.d2 / 4.0, -0.25);
    r.form = {ReducedKind::D1n, -sig.d3 / std::sqrt(-sig.d2)};
  }
  r.reduced = transform_h(r.v, transform_g(r.u, k));
  return r;
}

/// psi(s) = sqrt(1 + u s^2) phi(s / sqrt(1 + u s^2)).
inline PhiSpec apply_g(double u, const PhiSpec& phi) {
  const double R = phi.validity_radius();
  double rad = kInf;
  if (std::isfinite(R)) {
    const double m = 1.0 - u * R * R;
    if (m > 0.0) rad = R / std::sqrt(m);
  } else if (u < 0.0) {
    rad = 1.0 / std::sqrt(-u);
  }
  std::optional<OdeParams> ode;
  if (phi.ode()) ode = transform_g(u, *phi.ode());
  std::ostringstream name;
  name << "g_" << u << "(" << phi.name() << ")";
  return phi_closed_form(
      name.str(),
      [phi, u](auto s) {
        using std::sqrt;
        auto w = sqrt(1.0 + u * s * s);
        return w * phi.eval(s / w);
      },
      rad, ode, PhiVariant::Derived);
}

/// phi(v s).
inline PhiSpec apply_h(double v, const PhiSpec& phi) {
  if (v == 0.0) throw Error("apply_h needs v != 0");
  std::optional<OdeParams> ode;
  if (phi.ode()) ode = transform_h(v, *phi.ode());
  std::ostringstream name;
  name << "h_" << v << "(" << phi.name() << ")";
  return phi_closed_form(
      name.str(), [phi, v](auto s) { return phi.eval(v * s); }, phi.validity_radius() / std::abs(v), ode,
      PhiVariant::Derived);
}

struct Reversibilized {
  PhiSpec phi;         ///< phi(s) - phi'(0) s, an even function
  double theta_coef;   ///< theta = theta_coef * beta, so F + theta is reversible
};

inline Reversibilized reversibilize(const PhiSpec& phi) {
  const double e = phi.eps();
  std::optional<OdeParams> ode = phi.ode();
  if (ode) ode->eps = 0.0;
  Reversibilized out{phi_closed_form(
                         "even(" + phi.name() + ")", [phi, e](auto s) { return phi.eval(s) - e * s; },
                         phi.validity_radius(), ode, PhiVariant::Derived),
                     -e};
  return out;
}

struct CircleCoords {
  double x = 0.0;
  double y = 0.0;
  /// min over the two signs of |x^2 + (y +- 1)^2 - 1|; zero when the point is on a circle.
  double circle_residual = 0.0;
};

/// (2 sqrt|D2| D3 / (|D2| + D3^2), 2 D3 / (|D2| + D3^2)), with the origin for D2 = D3 = 0.
inline CircleCoords circle_coords(const InvariantSignature& sig) {
  CircleCoords c;
  const double den = std::abs(sig.d2) + sig.d3 * sig.d3;
  if (den == 0.0) return c;
  c.x = 2.0 * std::sqrt(std::abs(sig.d2)) * sig.d3 / den;
  c.y = 2.0 * sig.d3 / den;
  const double up = c.x * c.x + (c.y - 1.0) * (c.y - 1.0) - 1.0;
  const double dn = c.x * c.x + (c.y + 1.0) * (c.y + 1.0) - 1.0;
  c.circle_residual = std::min(std::abs(up), std::abs(dn));
  return c;
}

/// (alpha, beta) attached to a normal form and a flat alpha- with closed
/// conformal beta-, t = |beta-|^2:
///   D1p: a = (1-t)^{-2 sigma - 1} (a- + b- b- / (1-t)),  b = (1-t)^{-sigma-1} b-
///   D1z: a = e^{2 sigma t} a-,                            b = e^{sigma t} b-
///   D1n: a = E^2 (1+2 sigma t+t^2)^{-1/2} (a- - (2 sigma + t)/(1+2 sigma t+t^2) b- b-),
///        b = E (1+2 sigma t+t^2)^{-3/4} b-,
///        E = exp(-sigma/(2 sqrt(1-sigma^2)) (atan((sigma+t)/sqrt(1-sigma^2)) - C)).
/// With include_constant the D1n constant C = atan(sigma/sqrt(1-sigma^2)) makes
/// the pair equal to inverse_chain of the normal form; without it C = 0.
inline FieldPair canonical_pair(const ReducedForm& form, const MetricField& abar, const OneFormField& bbar,
                                bool include_constant = true) {
  form.validate();
  const double sg = form.sigma;
  const double C = (form.kind == ReducedKind::D1n && include_constant) ? std::atan(sg / std::sqrt(1.0 - sg * sg)) : 0.0;
  // returns (metric factor, off-diagonal coefficient, form factor) as functions of t
  auto coeffs = [form, sg, C](const auto& t) {
    using std::atan;
    using std::exp;
    using std::pow;
    using std::sqrt;
    using T = std::remove_cvref_t<decltype(t)>;
    struct Out {
      T ma, mb, fb;
    };
    switch (form.kind) {
      case ReducedKind::D1p: {
        const T w = 1.0 - t;
        if (!(value_of(w) > 0.0)) throw RegularityError("canonical pair (D1p) needs |beta-| < 1");
        const T ma = pow(w, -2.0 * sg - 1.0);
        return Out{ma, ma / w, pow(w, -sg - 1.0)};
      }
      case ReducedKind::D1z: {
        const T e = exp(sg * t);
        return Out{e * e, T(0.0), e};
      }
      case ReducedKind::D1n: {
        const double q = std::sqrt(1.0 - sg * sg);
        const T D = 1.0 + 2.0 * sg * t + t * t;
        const T E = exp(-sg / (2.0 * q) * (atan((sg + t) / q) - C));
        const T ma = E * E / sqrt(D);
        return Out{ma, -ma * (2.0 * sg + t) / D, E * pow(D, -0.75)};
      }
    }
    throw Error("unknown reduced form");
  };
  MetricField a(abar.dim(), abar.domain_radius(), [abar, bbar, coeffs](auto x) {
    const auto A = abar(x);
    const auto B = bbar(x);
    const auto c = coeffs(detail::squared_norm(A, B));
    return A * c.ma + outer(B, B) * c.mb;
  });
  OneFormField b(bbar.dim(), bbar.domain_radius(), [abar, bbar, coeffs](auto x) {
    const auto B = bbar(x);
    const auto c = coeffs(detail::squared_norm(abar(x), B));
    return scaled(B, c.fb);
  });
  return {std::move(a), std::move(b)};
}

/// Reference types for reports.
struct NamedType {
  std::string name;
  Quadruple k;
};

inline std::vector<NamedType> named_types() {
  return {
      {"riemannian", {0, 0, 0, 0}},
      {"randers", {0, 0, 0, 1}},
      {"(alpha+beta)^2/alpha", {2, 0, -3, 2}},
      {"alpha+beta^2/alpha", {2, 0, -3, 0}},
      {"alpha-beta^2/alpha", {-2, 0, 3, 0}},
  };
}

}  // namespace finslerlab
