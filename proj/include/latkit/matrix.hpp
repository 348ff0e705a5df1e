#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "latkit/errors.hpp"
#include "latkit/rational.hpp"

namespace latkit {

/// Dense row-major matrix. Rows are lattice vectors throughout the library.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw InvalidInput("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T> row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

  void append_row(std::span<const T> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw InvalidInput("row length mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Rows [first, first + count).
  Matrix row_block(std::size_t first, std::size_t count) const {
    Matrix m(count, cols_);
    for (std::size_t i = 0; i < count; ++i)
      std::copy(row(first + i).begin(), row(first + i).end(), m.row(i).begin());
    return m;
  }

  template <class U, class F>
  Matrix<U> map(F&& f) const {
    Matrix<U> m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(i, j) = f((*this)(i, j));
    return m;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("matrix product dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Matrix operator*(const T& s, const Matrix& a) {
    Matrix c = a;
    for (auto& v : c.data_) v *= s;
    return c;
  }

  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = Matrix<Integer>;
using RatMatrix = Matrix<Rational>;
using RealMatrix = Matrix<double>;

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// A * A^T.
template <class T>
Matrix<T> gram_of(const Matrix<T>& a) {
  Matrix<T> g(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      g(i, j) = dot<T>(a.row(i), a.row(j));
      if (i != j) g(j, i) = g(i, j);
    }
  return g;
}

namespace detail {

template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return std::abs(v);
  } else {
    return v == 0 ? 0.0 : 1.0;
  }
}

}  // namespace detail

/// Determinant by Gaussian elimination. Exact for Rational; partial pivoting
/// for double.
template <class T>
T determinant(Matrix<T> a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw InvalidInput("determinant of non-square matrix");
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    double best = detail::magnitude(a(c, c));
    for (std::size_t r = c + 1; r < n; ++r) {
      double m = detail::magnitude(a(r, c));
      if (m > best) {
        best = m;
        piv = r;
        if constexpr (!std::is_floating_point_v<T>) break;
      }
    }
    if (a(piv, c) == 0) return T(0);
    if (piv != c) {
      a.swap_rows(piv, c);
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a(r, c) == 0) continue;
      T f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

/// Gauss-Jordan inverse. Throws InvalidBasis on singular input.
template <class T>
Matrix<T> inverse(Matrix<T> a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw InvalidInput("inverse of non-square matrix");
  Matrix<T> inv = Matrix<T>::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    double best = detail::magnitude(a(c, c));
    for (std::size_t r = c + 1; r < n; ++r) {
      double m = detail::magnitude(a(r, c));
      if (m > best) {
        best = m;
        piv = r;
        if constexpr (!std::is_floating_point_v<T>) break;
      }
    }
    if (a(piv, c) == 0) throw InvalidBasis("singular matrix");
    a.swap_rows(piv, c);
    inv.swap_rows(piv, c);
    T p = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= p;
      inv(c, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a(r, c) == 0) continue;
      T f = a(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

/// Rank over the rationals (exact types) or with a relative tolerance (double).
template <class T>
std::size_t matrix_rank(Matrix<T> a, double rel_tol = 1e-10) {
  std::size_t rank = 0;
  double scale = 0;
  if constexpr (std::is_floating_point_v<T>) {
    for (const auto& v : a.data()) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t c = 0; c < a.cols() && rank < a.rows(); ++c) {
    std::size_t piv = rank;
    double best = detail::magnitude(a(rank, c));
    for (std::size_t r = rank + 1; r < a.rows(); ++r) {
      double m = detail::magnitude(a(r, c));
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (best <= rel_tol * scale) continue;
    } else {
      if (best == 0) continue;
    }
    a.swap_rows(piv, rank);
    for (std::size_t r = rank + 1; r < a.rows(); ++r) {
      if (a(r, c) == 0) continue;
      T f = a(r, c) / a(rank, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(r, j) -= f * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

inline RatMatrix to_rational(const IntMatrix& m) {
  return m.map<Rational>([](const Integer& z) { return Rational(z); });
}

inline RealMatrix to_real(const IntMatrix& m) {
  return m.map<double>([](const Integer& z) { return z.get_d(); });
}

inline RealMatrix to_real(const RatMatrix& m) {
  return m.map<double>([](const Rational& q) { return q.get_d(); });
}

}  // namespace latkit
