#pragma once

#include <stdexcept>
#include <string>

namespace finslerlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies outside the domain of a field, or an argument lies outside
/// the interval on which a function is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A positivity or regularity requirement of an (alpha,beta)-metric or of a
/// deformation factor is violated.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Numerical evaluation failed (nonconvergent quadrature, bad arguments).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace finslerlab
