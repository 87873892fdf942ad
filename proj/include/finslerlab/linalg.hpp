#pragma once

/// @file linalg.hpp
/// Small dense vectors and matrices over any scalar (double or dual).
/// Dimensions stay below ~10, so everything is plain row-major storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"

namespace finslerlab {

template <class T>
using Vec = std::vector<T>;

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0.0)) {}
  explicit Mat(std::size_t n) : Mat(n, n) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      for (double x : r) data_.push_back(T(x));
    }
  }

  static Mat identity(std::size_t n) {
    Mat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Mat& operator+=(const Mat& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, const T& c) {
    for (auto& x : a.data_) x = x * c;
    return a;
  }
  friend Mat operator*(const T& c, Mat a) { return std::move(a) * c; }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
Vec<T> matvec(const Mat<T>& m, const Vec<T>& x) {
  Vec<T> r(m.rows(), T(0.0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r[i] += m(i, j) * x[j];
  return r;
}

template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += a(i, k) * b(k, j);
  return r;
}

/// x^T m y
template <class T>
T bilinear(const Mat<T>& m, const Vec<T>& x, const Vec<T>& y) {
  T s(0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[i] * y[j];
  return s;
}

template <class T>
Mat<T> outer(const Vec<T>& a, const Vec<T>& b) {
  Mat<T> m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

template <class T>
Vec<T> scaled(Vec<T> v, const T& c) {
  for (auto& x : v) x = x * c;
  return v;
}

inline double norm2(const Vec<double>& v) { return std::sqrt(dot(v, v)); }

inline double max_abs(const Vec<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const Mat<double>& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

inline double frobenius(const Mat<double>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

template <class T>
Mat<double> values(const Mat<T>& m) {
  Mat<double> r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = value_of(m(i, j));
  return r;
}

template <class T>
Vec<double> values(const Vec<T>& v) {
  Vec<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = value_of(v[i]);
  return r;
}

inline double norm1(const Mat<double>& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

/// Matrices whose 1-norm condition number exceeds this are rejected.
inline constexpr double kMaxCondition = 1e12;

/// Inverse by Gauss-Jordan elimination with partial pivoting (pivots chosen
/// on the value part). Throws SingularMatrixError when a pivot vanishes or
/// the 1-norm condition number exceeds kMaxCondition.
template <class T>
Mat<T> inverse(const Mat<T>& m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw SingularMatrixError("inverse: matrix is not square");
  Mat<T> a = m;
  Mat<T> inv = Mat<T>::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    double best = std::abs(value_of(a(c, c)));
    for (std::size_t r = c + 1; r < n; ++r) {
      double v = std::abs(value_of(a(r, c)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) throw SingularMatrixError("inverse: zero pivot");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(c, j), a(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    }
    T p = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) = a(c, j) / p;
      inv(c, j) = inv(c, j) / p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = a(r, c);
      if (value_of(f) == 0.0 && !is_dual_v<T>) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  const double cond = norm1(values(m)) * norm1(values(inv));
  if (!(cond <= kMaxCondition)) {
    throw SingularMatrixError("inverse: condition number " + std::to_string(cond) + " exceeds limit");
  }
  return inv;
}

/// Eigenvalues of a symmetric matrix in ascending order.
inline Vec<double> symmetric_eigenvalues(const Mat<double>& m) {
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd e(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) e(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
  Vec<double> r(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return r;
}

}  // namespace finslerlab
