#pragma once

/// @file univariate.hpp
/// Type-erased smooth function of one real variable, evaluated through its
/// 2-jet so it composes with nested duals.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"

namespace finslerlab {

class Univariate {
 public:
  using JetFn = std::function<Jet2(double)>;

  Univariate() = default;
  /// `jet` must return (f, f', f'') at points of the open interval (lo, hi).
  explicit Univariate(JetFn jet, double lo = -std::numeric_limits<double>::infinity(),
                      double hi = std::numeric_limits<double>::infinity())
      : jet_(std::make_shared<JetFn>(std::move(jet))), lo_(lo), hi_(hi) {}

  /// Wraps a generic callable usable with double, D1 and D2 arguments.
  template <class Fn>
  static Univariate from_generic(Fn fn, double lo = -std::numeric_limits<double>::infinity(),
                                 double hi = std::numeric_limits<double>::infinity()) {
    return Univariate([fn](double s) { return jet_of(fn, s); }, lo, hi);
  }

  static Univariate constant(double c) {
    return Univariate([c](double) { return Jet2{c, 0.0, 0.0}; });
  }

  bool valid() const { return static_cast<bool>(jet_); }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  bool contains(double s) const { return s > lo_ && s < hi_; }

  Jet2 jet(double s) const {
    if (!contains(s)) {
      std::ostringstream os;
      os << "argument " << s << " outside the open interval (" << lo_ << ", " << hi_ << ")";
      throw DomainError(os.str());
    }
    Jet2 j = (*jet_)(s);
    if (!std::isfinite(j.f0) || !std::isfinite(j.f1) || !std::isfinite(j.f2)) {
      std::ostringstream os;
      os << "non-finite value at " << s;
      throw EvaluationError(os.str());
    }
    return j;
  }

  double operator()(double s) const { return jet(s).f0; }
  double d1(double s) const { return jet(s).f1; }
  double d2(double s) const { return jet(s).f2; }

  /// Evaluation on any scalar (double or dual up to depth 2).
  template <class T>
  T eval(const T& s) const {
    return lift(jet(value_of(s)), s);
  }

 private:
  std::shared_ptr<const JetFn> jet_;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
};

}  // namespace finslerlab
