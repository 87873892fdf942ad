#pragma once

/// @file diffgeo.hpp
/// Riemannian primitives on a coordinate patch: Christoffel symbols,
/// the Riemannian spray, covariant derivative of a 1-form with its
/// symmetric/antisymmetric split and the usual contractions, and the
/// norm of a 1-form. Derivatives come from forward-mode duals.

#include <cmath>
#include <cstddef>
#include <vector>

#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"

namespace finslerlab {

/// First derivatives of a metric: a_ij and d_k a_ij.
struct MetricJet {
  Mat<double> a;
  std::vector<Mat<double>> da;  ///< da[k](i,j) = d a_ij / d x^k
};

inline MetricJet metric_jet(const MetricField& a, const Point& x) {
  a.require_inside(x);
  const std::size_t n = x.size();
  MetricJet jet;
  jet.da.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Mat<D1> m = a(seed_direction(x.coords, k));
    if (k == 0) jet.a = values(m);
    Mat<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = m(i, j).d;
    jet.da.push_back(std::move(d));
  }
  return jet;
}

/// Gamma^i_jk stored densely; symmetric in (j,k).
class Christoffel {
 public:
  explicit Christoffel(std::size_t n) : n_(n), g_(n * n * n, 0.0) {}
  std::size_t dim() const { return n_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return g_[(i * n_ + j) * n_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return g_[(i * n_ + j) * n_ + k]; }

 private:
  std::size_t n_;
  std::vector<double> g_;
};

inline Christoffel christoffel_from_jet(const MetricJet& jet) {
  const std::size_t n = jet.a.rows();
  const Mat<double> ainv = inverse(jet.a);
  Christoffel gamma(n);
  // lowered symbols Gamma_ljk = 1/2 (d_j a_lk + d_k a_jl - d_l a_jk)
  std::vector<double> low(n * n * n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        low[(l * n + j) * n + k] = 0.5 * (jet.da[j](l, k) + jet.da[k](j, l) - jet.da[l](j, k));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += ainv(i, l) * low[(l * n + j) * n + k];
        gamma(i, j, k) = s;
      }
  return gamma;
}

/// Christoffel symbols of the second kind of `a` at x.
inline Christoffel christoffel(const MetricField& a, const Point& x) {
  return christoffel_from_jet(metric_jet(a, x));
}

inline Vec<double> spray_from_christoffel(const Christoffel& gamma, const TangentVector& y) {
  const std::size_t n = gamma.dim();
  Vec<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) s += gamma(i, j, k) * y[j] * y[k];
    g[i] = 0.5 * s;
  }
  return g;
}

/// Spray coefficients G^i = 1/2 Gamma^i_jk y^j y^k of the Riemannian metric.
inline Vec<double> spray_riemann(const MetricField& a, const Point& x, const TangentVector& y) {
  return spray_from_christoffel(christoffel(a, x), y);
}

/// Covariant derivative b_{i|j} of a 1-form together with the tensors and
/// contractions built from it. Indices are raised with a^{ij}; a trailing
/// `0` means contraction with y; an index contracted with b^i disappears.
struct CovariantData {
  Mat<double> a;
  Mat<double> a_inv;
  Christoffel gamma{0};
  Vec<double> b;     ///< b_i
  Vec<double> b_up;  ///< b^i
  double b2 = 0.0;   ///< a^{ij} b_i b_j
  Mat<double> bij;   ///< b_{i|j}
  Mat<double> rij;   ///< (b_{i|j} + b_{j|i}) / 2
  Mat<double> sij;   ///< (b_{i|j} - b_{j|i}) / 2
  Vec<double> r_i;   ///< r_ij b^j
  Vec<double> s_i;   ///< b^j s_ji
  double r = 0.0;    ///< r_i b^i

  std::size_t dim() const { return b.size(); }

  /// Spray coefficients of the Riemannian metric a.
  Vec<double> spray_alpha(const TangentVector& y) const { return spray_from_christoffel(gamma, y); }

  double r00(const TangentVector& y) const { return bilinear(rij, y.comps, y.comps); }
  double r0(const TangentVector& y) const { return dot(r_i, y.comps); }
  double s0(const TangentVector& y) const { return dot(s_i, y.comps); }
  /// s_i0 = s_ij y^j
  Vec<double> s_low0(const TangentVector& y) const { return matvec(sij, y.comps); }
  /// s^i_0 = a^{ij} s_j0
  Vec<double> s_up0(const TangentVector& y) const { return matvec(a_inv, s_low0(y)); }
  /// r^i = a^{ij} r_j
  Vec<double> r_up() const { return matvec(a_inv, r_i); }
  /// s^i = a^{ij} s_j
  Vec<double> s_up() const { return matvec(a_inv, s_i); }
  /// alpha^2 = a_ij y^i y^j
  double alpha2(const TangentVector& y) const { return bilinear(a, y.comps, y.comps); }
  double beta(const TangentVector& y) const { return dot(b, y.comps); }
};

inline CovariantData covariant_derivative(const OneFormField& b, const MetricField& a, const Point& x) {
  const MetricJet jet = metric_jet(a, x);
  const Christoffel gamma = christoffel_from_jet(jet);
  const std::size_t n = x.size();

  CovariantData cd;
  cd.a = jet.a;
  cd.a_inv = inverse(jet.a);
  cd.gamma = gamma;
  // db(i, j) = d b_i / d x^j
  Mat<double> db(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec<D1> bv = b(seed_direction(x.coords, j));
    if (j == 0) cd.b = values(bv);
    for (std::size_t i = 0; i < n; ++i) db(i, j) = bv[i].d;
  }
  cd.b_up = matvec(cd.a_inv, cd.b);
  cd.b2 = dot(cd.b, cd.b_up);
  cd.bij = Mat<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = db(i, j);
      for (std::size_t k = 0; k < n; ++k) s -= cd.b[k] * gamma(k, i, j);
      cd.bij(i, j) = s;
    }
  cd.rij = Mat<double>(n);
  cd.sij = Mat<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cd.rij(i, j) = 0.5 * (cd.bij(i, j) + cd.bij(j, i));
      cd.sij(i, j) = 0.5 * (cd.bij(i, j) - cd.bij(j, i));
    }
  cd.r_i = matvec(cd.rij, cd.b_up);
  cd.s_i = matvec(cd.sij.transpose(), cd.b_up);
  cd.r = dot(cd.r_i, cd.b_up);
  return cd;
}

/// Norm b = sqrt(a^{ij} b_i b_j) of a 1-form at x.
inline double norm_b(const MetricField& a, const OneFormField& b, const Point& x) {
  a.require_inside(x);
  const Mat<double> ai = inverse(a(x));
  const Vec<double> bv = b(x);
  return std::sqrt(std::max(0.0, bilinear(ai, bv, bv)));
}

/// Conformality of a 1-form: c(x) = a^{ij} r_ij / n and the Frobenius norm
/// of r_ij - c a_ij.
struct ConformalFit {
  double c = 0.0;
  double residual = 0.0;
};

inline ConformalFit conformal_fit(const CovariantData& cd) {
  const std::size_t n = cd.dim();
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) tr += cd.a_inv(i, j) * cd.rij(i, j);
  ConformalFit fit;
  fit.c = tr / static_cast<double>(n);
  fit.residual = frobenius(cd.rij - cd.a * fit.c);
  return fit;
}

}  // namespace finslerlab
