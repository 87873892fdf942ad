#pragma once

/// @file models.hpp
/// Concrete metrics: Funk, Berwald, the phi_sigma family on the unit ball,
/// space forms in projective coordinates, their closed conformal 1-forms and
/// conformal vector fields, and metrics assembled through the inverse chain.

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "finslerlab/ab_metric.hpp"
#include "finslerlab/deform.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"
#include "finslerlab/phi.hpp"

namespace finslerlab {

namespace detail {

inline void require_dim(int n, int min = 2) {
  if (n < min) throw Error("dimension must be at least " + std::to_string(min));
}

template <class T>
T sq_norm(std::span<const T> x) {
  T r(0.0);
  for (const T& v : x) r = r + v * v;
  return r;
}

template <class T>
T dot_span(std::span<const T> x, const Vec<double>& a) {
  T r(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) r = r + x[i] * a[i];
  return r;
}

/// ((1-|x|^2) delta_ij + x_i x_j) / (1-|x|^2)^power.
template <class T>
Mat<T> ball_metric(std::span<const T> x, double power) {
  using std::pow;
  const std::size_t n = x.size();
  const T l = 1.0 - sq_norm(x);
  const T scale = 1.0 / pow(l, power);
  Mat<T> m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = ((i == j ? l : T(0.0)) + x[i] * x[j]) * scale;
  return m;
}

/// c x_i / (1-|x|^2)^power.
template <class T>
Vec<T> ball_form(std::span<const T> x, double c, double power) {
  using std::pow;
  const T scale = c / pow(1.0 - sq_norm(x), power);
  Vec<T> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] * scale;
  return r;
}

}  // namespace detail

/// F = sqrt((1-|x|^2)|y|^2 + <x,y>^2)/(1-|x|^2) - <x,y>/(1-|x|^2) on B^n(1).
inline ABMetric funk_metric(int n) {
  detail::require_dim(n);
  MetricField a(n, 1.0, [](auto x) { return detail::ball_metric(x, 2.0); });
  OneFormField b(n, 1.0, [](auto x) { return detail::ball_form(x, -1.0, 1.0); });
  return ABMetric{std::move(a), std::move(b), phi_randers(1.0), "funk"};
}

/// Berwald's metric F = (alpha + beta)^2 / alpha on B^n(1).
inline ABMetric berwald_metric(int n) {
  detail::require_dim(n);
  MetricField a(n, 1.0, [](auto x) { return detail::ball_metric(x, 4.0); });
  OneFormField b(n, 1.0, [](auto x) { return detail::ball_form(x, 1.0, 2.0); });
  return ABMetric{std::move(a), std::move(b), phi_berwald(), "berwald"};
}

/// Largest |b| at which family metrics are checked for regularity.
inline constexpr double kFamilyCheckRadius = 0.99;

/// sqrt((1-|x|^2)|y|^2 + <x,y>^2) / (1-|x|^2)^{sigma+1} phi_sigma(<x,y> / sqrt(...)),
/// on the ball of radius 0.999 where the series is evaluated.
inline ABMetric family_sigma_metric(double sigma, double eps, int n, double tol = 1e-14) {
  detail::require_dim(n);
  PhiSpec phi = phi_sigma(sigma, eps, tol);
  const RegularityReport rep = regularity_check(phi, kFamilyCheckRadius);
  if (!rep.pass) {
    std::ostringstream os;
    os << "phi_sigma with sigma=" << sigma << ", eps=" << eps << " is not regular up to b=" << kFamilyCheckRadius
       << " (admissible up to " << rep.b0_max << ")";
    throw RegularityError(os.str());
  }
  const double R = phi.validity_radius();
  const double p = 2.0 * sigma + 2.0;
  MetricField a(n, R, [p](auto x) { return detail::ball_metric(x, p); });
  OneFormField b(n, R, [sigma](auto x) { return detail::ball_form(x, 1.0, sigma + 1.0); });
  std::ostringstream name;
  name << "family_sigma(sigma=" << sigma << ",eps=" << eps << ")";
  return ABMetric{std::move(a), std::move(b), std::move(phi), name.str()};
}

struct EpsRange {
  double lo = 0.0;
  double hi = 0.0;
  bool admissible = false;
};

/// Admissible |eps| for family_sigma_metric(sigma, ., .), found by bisection
/// on regularity_check over eps in [0, 4]. phi_sigma(-s) with -eps is the
/// same function reflected, so the range is symmetric: [-hi, hi].
inline EpsRange family_sigma_eps_range(double sigma, int iterations = 40) {
  auto ok = [sigma](double eps) {
    try {
      return regularity_check(phi_sigma(sigma, eps), kFamilyCheckRadius).pass;
    } catch (const Error&) {
      return false;
    }
  };
  EpsRange r;
  if (!ok(0.0)) return r;
  r.admissible = true;
  if (ok(4.0)) {
    r.lo = -4.0;
    r.hi = 4.0;
    return r;
  }
  double good = 0.0, bad = 4.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (good + bad);
    (ok(mid) ? good : bad) = mid;
  }
  r.lo = -good;
  r.hi = good;
  return r;
}

/// Domain radius of the space form with curvature mu: 1/sqrt(-mu) for
/// mu < 0, otherwise the cap.
inline double space_form_radius(double mu, double cap = 1.0) {
  return mu < 0.0 ? 1.0 / std::sqrt(-mu) : cap;
}

/// h_ij = ((1 + mu|x|^2) delta_ij - mu x_i x_j) / (1 + mu|x|^2)^2.
inline MetricField space_form_metric(double mu, int n, double cap = 1.0) {
  detail::require_dim(n);
  return MetricField(n, space_form_radius(mu, cap), [mu, n](auto x) {
    using T = scalar_of<decltype(x)>;
    const T l = 1.0 + mu * detail::sq_norm(x);
    if (!(value_of(l) > 0.0)) throw DomainError("space form needs 1 + mu|x|^2 > 0");
    Mat<T> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = ((i == j ? l : T(0.0)) - mu * x[i] * x[j]) / (l * l);
    return m;
  });
}

/// b_i = (lambda x_i + (1 + mu|x|^2) a_i - mu <a,x> x_i) / (1 + mu|x|^2)^{3/2},
/// the dual of W = sqrt(1 + mu|x|^2)(lambda x + a) under space_form_metric(mu).
inline OneFormField closed_conformal_form(double mu, double lambda, Vec<double> a, double cap = 1.0) {
  const int n = static_cast<int>(a.size());
  detail::require_dim(n);
  return OneFormField(n, space_form_radius(mu, cap), [mu, lambda, a = std::move(a)](auto x) {
    using T = scalar_of<decltype(x)>;
    using std::pow;
    const T l = 1.0 + mu * detail::sq_norm(x);
    if (!(value_of(l) > 0.0)) throw DomainError("space form needs 1 + mu|x|^2 > 0");
    const T ax = detail::dot_span(x, a);
    const T scale = 1.0 / pow(l, 1.5);
    Vec<T> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = (lambda * x[i] + l * a[i] - mu * ax * x[i]) * scale;
    return r;
  });
}

struct ConformalFieldParams {
  double mu = 0.0;
  double lambda = 0.0;
  Mat<double> q;  ///< antisymmetric
  Vec<double> a;
  Vec<double> b;
};

struct ConformalField {
  VectorField W;
  OneFormField flat;  ///< W lowered with space_form_metric(mu)
};

/// W = (lambda sqrt(1+mu|x|^2) + <a,x>) x - |x|^2 a / (sqrt(1+mu|x|^2) + 1) + q x + b + mu <b,x> x,
/// the conformal fields of space_form_metric(mu) for n >= 3.
inline ConformalField conformal_field(const ConformalFieldParams& p, double cap = 1.0) {
  const int n = static_cast<int>(p.a.size());
  detail::require_dim(n, 3);
  if (static_cast<int>(p.b.size()) != n || static_cast<int>(p.q.rows()) != n || static_cast<int>(p.q.cols()) != n)
    throw Error("conformal_field: q, a, b must share the dimension");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(p.q(i, j) + p.q(j, i)) > 1e-12) throw Error("conformal_field: q must be antisymmetric");
  const double R = space_form_radius(p.mu, cap);
  VectorField W(n, R, [p, n](auto x) {
    using T = scalar_of<decltype(x)>;
    using std::sqrt;
    const T r2 = detail::sq_norm(x);
    const T l = 1.0 + p.mu * r2;
    if (!(value_of(l) > 0.0)) throw DomainError("space form needs 1 + mu|x|^2 > 0");
    const T sq = sqrt(l);
    const T c = p.lambda * sq + detail::dot_span(x, p.a);
    const T bx = detail::dot_span(x, p.b);
    Vec<T> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      T qx(0.0);
      for (int j = 0; j < n; ++j) qx = qx + p.q(i, j) * x[j];
      w[i] = c * x[i] - r2 * p.a[i] / (sq + 1.0) + qx + p.b[i] + p.mu * bx * x[i];
    }
    return w;
  });
  const MetricField h = space_form_metric(p.mu, n, cap);
  OneFormField flat(n, R, [W, h](auto x) { return matvec(h(x), W(x)); });
  return {std::move(W), std::move(flat)};
}

/// F = alpha phi(beta/alpha) with (alpha, beta) = inverse_chain(abar, bbar, k).
inline ABMetric chain_metric(const MetricField& abar, const OneFormField& bbar, const OdeParams& k, PhiSpec phi,
                             std::string name) {
  FieldPair ab = inverse_chain(abar, bbar, k);
  return ABMetric{std::move(ab.a), std::move(ab.b), std::move(phi), std::move(name)};
}

/// k = (2 sign, 0, -2 sign): F = e^{sign b-^2} alpha- phi_{0, sign/2}(beta-/alpha-).
inline ABMetric example63_metric(int sign, double eps, const MetricField& abar, const OneFormField& bbar) {
  if (sign != 1 && sign != -1) throw Error("example63: sign must be +1 or -1");
  const double s = static_cast<double>(sign);
  const OdeParams k{2.0 * s, 0.0, -2.0 * s, eps};
  return chain_metric(abar, bbar, k, phi_zero_p(0.5 * s, eps), sign > 0 ? "example63+" : "example63-");
}

/// k = (0, 1, 0) with phi from quadrature.
inline ABMetric example64_metric(double eps, const MetricField& abar, const OneFormField& bbar) {
  const OdeParams k{0.0, 1.0, 0.0, eps};
  return chain_metric(abar, bbar, k, phi_quadrature(k), "example64");
}

/// Funk with alpha scaled by (1 + 0.1 x^1); not projectively flat.
inline ABMetric perturbed_funk_metric(int n) {
  ABMetric f = funk_metric(n);
  MetricField a(n, 1.0, [base = f.alpha](auto x) { return base(x) * (1.0 + 0.1 * x[0]); });
  return ABMetric{std::move(a), f.beta, f.phi, "perturbed_funk"};
}

/// Euclidean norm as an ABMetric with beta = 0.
inline ABMetric euclidean_model(int n, double radius = 1.0) {
  detail::require_dim(n);
  return ABMetric{euclidean_metric(n, radius), constant_form(Vec<double>(static_cast<std::size_t>(n), 0.0), radius),
                  phi_riemannian(), "euclidean"};
}

enum class ModelKind { Funk, Berwald, SpaceForm, FamilySigma, Example63, Example64, PerturbedFunk, Euclidean };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Funk: return "funk";
    case ModelKind::Berwald: return "berwald";
    case ModelKind::SpaceForm: return "space-form";
    case ModelKind::FamilySigma: return "sigma";
    case ModelKind::Example63: return "example63";
    case ModelKind::Example64: return "example64";
    case ModelKind::PerturbedFunk: return "perturbed-funk";
    case ModelKind::Euclidean: return "euclidean";
  }
  return "?";
}

/// Model selector. Example metrics use alpha- = Euclidean and
/// beta- = lambda <x,y> unless built directly.
struct ModelId {
  ModelKind kind = ModelKind::Funk;
  int dim = 3;
  double mu = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  int sign = 1;
  double lambda = 0.3;

  void validate() const {
    detail::require_dim(dim);
    if (kind == ModelKind::Example63 && sign != 1 && sign != -1) throw Error("example63 sign must be +1 or -1");
  }
};

inline ABMetric make_model(const ModelId& id) {
  id.validate();
  const int n = id.dim;
  switch (id.kind) {
    case ModelKind::Funk: return funk_metric(n);
    case ModelKind::Berwald: return berwald_metric(n);
    case ModelKind::SpaceForm:
      return ABMetric{space_form_metric(id.mu, n),
                      constant_form(Vec<double>(static_cast<std::size_t>(n), 0.0), space_form_radius(id.mu)),
                      phi_riemannian(), "space_form"};
    case ModelKind::FamilySigma: return family_sigma_metric(id.sigma, id.eps, n);
    case ModelKind::Example63:
      return example63_metric(id.sign, id.eps, euclidean_metric(n),
                              closed_conformal_form(0.0, id.lambda, Vec<double>(static_cast<std::size_t>(n), 0.0)));
    case ModelKind::Example64:
      return example64_metric(id.eps, euclidean_metric(n),
                              closed_conformal_form(0.0, id.lambda, Vec<double>(static_cast<std::size_t>(n), 0.0)));
    case ModelKind::PerturbedFunk: return perturbed_funk_metric(n);
    case ModelKind::Euclidean: return euclidean_model(n);
  }
  throw Error("unknown model");
}

}  // namespace finslerlab
