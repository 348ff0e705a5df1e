#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the enumeration or mass code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "latkit/core.hpp"

namespace oracle {

using latkit::Integer;
using latkit::IntMatrix;
using latkit::LatticeBasis;
using latkit::Rational;
using latkit::RatMatrix;

inline constexpr double pi = std::numbers::pi;

/// sum_{|z| <= limit} exp(-pi (z + shift)^2 / s^2)
inline double theta_1d(double s, double shift = 0, int limit = 60) {
  double acc = 0;
  for (int z = -limit; z <= limit; ++z) acc += std::exp(-pi * (z + shift) * (z + shift) / (s * s));
  return acc;
}

/// Points of Z^n with |x|^2 <= r2, counted over the integer box.
inline std::uint64_t box_count_zn(int n, double r2) {
  const int b = static_cast<int>(std::ceil(std::sqrt(r2)));
  std::vector<int> x(n, -b);
  std::uint64_t count = 0;
  while (true) {
    long s = 0;
    for (int v : x) s += v * v;
    if (s <= r2 + 1e-12) ++count;
    int i = 0;
    while (i < n && x[i] == b) x[i++] = -b;
    if (i == n) break;
    ++x[i];
  }
  return count;
}

/// Calls f on every integer vector in {-b..b}^d.
inline void for_box(int d, int b, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> x(d, -b);
  while (true) {
    f(x);
    int i = 0;
    while (i < d && x[i] == b) x[i++] = -b;
    if (i == d) break;
    ++x[i];
  }
}

/// Exact Gram determinant of coefficient rows c against basis rows.
inline Rational gram_det(const RatMatrix& basis, const std::vector<std::vector<int>>& c) {
  const std::size_t k = c.size(), n = basis.cols(), d = basis.rows();
  RatMatrix v(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (c[i][j] != 0)
        for (std::size_t t = 0; t < n; ++t) v(i, t) += Rational(c[i][j]) * basis(j, t);
  return latkit::determinant(latkit::gram_of(v));
}

/// Minimum nonzero Gram determinant over rank-k sublattices generated by
/// coefficient rows with entries in {-b..b} (k <= 2) -- the coefficient-box
/// oracle. For k > 2 rows are drawn from the box vectors in increasing order.
inline Rational box_min_gram_det(const RatMatrix& basis, int k, int b) {
  const int d = static_cast<int>(basis.rows());
  const std::size_t n = basis.cols();
  std::vector<std::vector<int>> box;
  std::vector<std::vector<double>> pts;
  for_box(d, b, [&](const std::vector<int>& x) {
    // one representative per +-pair
    auto nz = std::find_if(x.begin(), x.end(), [](int v) { return v != 0; });
    if (nz == x.end() || *nz < 0) return;
    box.push_back(x);
    std::vector<double> p(n, 0.0);
    for (int j = 0; j < d; ++j)
      for (std::size_t t = 0; t < n; ++t) p[t] += x[j] * basis(j, t).get_d();
    pts.push_back(p);
  });
  Rational best = -1;
  double best_f = INFINITY;
  std::vector<std::size_t> idx(k);
  std::function<void(int, std::size_t)> rec = [&](int level, std::size_t start) {
    if (level == k) {
      // float Gram determinant as a filter, exact value for the survivors
      std::vector<double> g(k * k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          double v = 0;
          for (std::size_t t = 0; t < n; ++t) v += pts[idx[i]][t] * pts[idx[j]][t];
          g[i * k + j] = v;
        }
      double det = 1;
      for (int p = 0; p < k; ++p) {
        det *= g[p * k + p];
        if (std::abs(g[p * k + p]) < 1e-300) break;
        for (int i = p + 1; i < k; ++i) {
          const double f = g[i * k + p] / g[p * k + p];
          for (int j = p; j < k; ++j) g[i * k + j] -= f * g[p * k + j];
        }
      }
      if (det > best_f * (1 + 1e-6) + 1e-12) return;
      std::vector<std::vector<int>> rows;
      for (auto i : idx) rows.push_back(box[i]);
      Rational e = gram_det(basis, rows);
      if (e > 0 && (best < 0 || e < best)) {
        best = e;
        best_f = e.get_d();
      }
      return;
    }
    for (std::size_t i = start; i < box.size(); ++i) {
      idx[level] = i;
      rec(level + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Random integer matrix with nonzero determinant.
inline IntMatrix random_int_basis(std::mt19937_64& rng, std::size_t n, int range = 4) {
  std::uniform_int_distribution<int> dist(-range, range);
  while (true) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = dist(rng);
    if (latkit::determinant(latkit::to_rational(m)) != 0) return m;
  }
}

/// Random unimodular matrix as a product of elementary operations.
inline IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t n, int steps = 12) {
  IntMatrix u = IntMatrix::identity(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<int> mult(-2, 2);
  for (int s = 0; s < steps; ++s) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const int c = mult(rng);
    for (std::size_t t = 0; t < n; ++t) u(i, t) += c * u(j, t);
  }
  return u;
}

inline LatticeBasis exact_basis(const IntMatrix& m) { return LatticeBasis(latkit::to_rational(m)); }

/// Random rotation from the QR of a Gaussian matrix (Gram-Schmidt by hand).
inline latkit::RealMatrix random_rotation(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  latkit::RealMatrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0;
      for (std::size_t t = 0; t < n; ++t) d += v[t] * q(j, t);
      for (std::size_t t = 0; t < n; ++t) v[t] -= d * q(j, t);
    }
    double nv = 0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    for (std::size_t t = 0; t < n; ++t) q(i, t) = v[t] / nv;
  }
  return q;
}

/// Canonical row HNF of a 2-row integer matrix by explicit Euclid steps.
inline std::vector<std::vector<long>> hnf_2x2(long a, long b, long c, long d) {
  // rows (a,b), (c,d); make the first column gcd via Euclid on rows
  while (c != 0) {
    long q = a / c;
    a -= q * c;
    b -= q * d;
    std::swap(a, c);
    std::swap(b, d);
  }
  if (a < 0) {
    a = -a;
    b = -b;
  }
  if (d < 0) d = -d;
  if (d != 0) b = ((b % d) + d) % d;
  return {{a, b}, {0, d}};
}

}  // namespace oracle
