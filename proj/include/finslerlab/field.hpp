#pragma once

/// @file field.hpp
/// Points, tangent vectors and type-erased smooth fields on a ball.
///
/// A field wraps a generic callable `fn(std::span<const T> x) -> Out<T>`
/// and instantiates it for T = double, D1 and D2, which is what the
/// differentiation engine needs. Fields are immutable and cheap to copy.

#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>

#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/linalg.hpp"

namespace finslerlab {

/// Coordinates x^i of a point.
struct Point {
  Vec<double> coords;

  Point() = default;
  explicit Point(Vec<double> c) : coords(std::move(c)) {}
  Point(std::initializer_list<double> c) : coords(c) {}

  std::size_t size() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }
  double norm() const { return norm2(coords); }
};

/// Components y^i of a tangent vector.
struct TangentVector {
  Vec<double> comps;

  TangentVector() = default;
  explicit TangentVector(Vec<double> c) : comps(std::move(c)) {}
  TangentVector(std::initializer_list<double> c) : comps(c) {}

  std::size_t size() const { return comps.size(); }
  double operator[](std::size_t i) const { return comps[i]; }
  double& operator[](std::size_t i) { return comps[i]; }
  double norm() const { return norm2(comps); }
  bool is_zero() const { return max_abs(comps) == 0.0; }
};

template <class T>
using Scalar = T;

/// Scalar type of the span a field callable receives.
template <class S>
using scalar_of = typename std::remove_cvref_t<S>::value_type;

namespace detail {

template <template <class> class Out>
class FieldConcept {
 public:
  virtual ~FieldConcept() = default;
  virtual Out<double> eval(std::span<const double> x) const = 0;
  virtual Out<D1> eval(std::span<const D1> x) const = 0;
  virtual Out<D2> eval(std::span<const D2> x) const = 0;
};

template <template <class> class Out, class Fn>
class FieldModel final : public FieldConcept<Out> {
 public:
  explicit FieldModel(Fn fn) : fn_(std::move(fn)) {}
  Out<double> eval(std::span<const double> x) const override { return fn_(x); }
  Out<D1> eval(std::span<const D1> x) const override { return fn_(x); }
  Out<D2> eval(std::span<const D2> x) const override { return fn_(x); }

 private:
  Fn fn_;
};

}  // namespace detail

/// A smooth field on the open ball |x| < domain_radius of R^dim.
template <template <class> class Out, class Tag>
class Field {
 public:
  Field() = default;

  template <class Fn>
  Field(int dim, double domain_radius, Fn fn)
      : dim_(dim),
        radius_(domain_radius),
        impl_(std::make_shared<detail::FieldModel<Out, Fn>>(std::move(fn))) {
    if (dim < 1) throw EvaluationError("field dimension must be positive");
    if (!(domain_radius > 0.0)) throw EvaluationError("field domain radius must be positive");
  }

  int dim() const { return dim_; }
  double domain_radius() const { return radius_; }
  bool valid() const { return static_cast<bool>(impl_); }

  template <class T>
  Out<T> operator()(std::span<const T> x) const {
    return impl_->eval(x);
  }
  template <class T>
  Out<T> operator()(const Vec<T>& x) const {
    return impl_->eval(std::span<const T>(x.data(), x.size()));
  }
  Out<double> operator()(const Point& x) const { return (*this)(x.coords); }

  bool contains(const Point& x) const {
    return static_cast<int>(x.size()) == dim_ && x.norm() < radius_;
  }

  /// Throws DomainError unless x has the right dimension and |x| < radius.
  void require_inside(const Point& x) const {
    if (static_cast<int>(x.size()) != dim_) {
      throw DomainError("point dimension " + std::to_string(x.size()) + " does not match field dimension " +
                        std::to_string(dim_));
    }
    for (double c : x.coords) {
      if (!std::isfinite(c)) throw DomainError("point has non-finite coordinates");
    }
    if (!(x.norm() < radius_)) {
      std::ostringstream os;
      os << "point with |x| = " << x.norm() << " outside domain radius " << radius_;
      throw DomainError(os.str());
    }
  }

 private:
  int dim_ = 0;
  double radius_ = 0.0;
  std::shared_ptr<const detail::FieldConcept<Out>> impl_;
};

struct MetricTag;
struct OneFormTag;
struct VectorTag;
struct ScalarTag;

/// x -> a_ij(x), symmetric positive definite.
using MetricField = Field<Mat, MetricTag>;
/// x -> b_i(x).
using OneFormField = Field<Vec, OneFormTag>;
/// x -> W^i(x).
using VectorField = Field<Vec, VectorTag>;
/// x -> f(x).
using ScalarField = Field<Scalar, ScalarTag>;

/// Seeds a point as a D1 vector with unit derivative along coordinate k.
inline Vec<D1> seed_direction(const Vec<double>& x, std::size_t k) {
  Vec<D1> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = D1{x[i], i == k ? 1.0 : 0.0};
  return r;
}

/// Constant Euclidean metric delta_ij.
inline MetricField euclidean_metric(int n, double radius = 1.0) {
  return MetricField(n, radius, [n](auto x) {
    using T = scalar_of<decltype(x)>;
    return Mat<T>::identity(static_cast<std::size_t>(n));
  });
}

/// Constant 1-form with the given components.
inline OneFormField constant_form(Vec<double> b, double radius = 1.0) {
  const int n = static_cast<int>(b.size());
  return OneFormField(n, radius, [b = std::move(b)](auto x) {
    using T = scalar_of<decltype(x)>;
    Vec<T> r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = T(b[i]);
    return r;
  });
}

/// Squared norm b^2 = a^{ij} b_i b_j as a scalar field.
inline ScalarField squared_norm_field(const MetricField& a, const OneFormField& b) {
  return ScalarField(a.dim(), a.domain_radius(), [a, b](auto x) {
    using T = scalar_of<decltype(x)>;
    Mat<T> ai = inverse(a(x));
    Vec<T> bv = b(x);
    return bilinear(ai, bv, bv);
  });
}

}  // namespace finslerlab
