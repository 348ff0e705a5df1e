#include "latkit/core.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "latkit/errors.hpp"

namespace latkit {

namespace {

// log det of a symmetric positive definite matrix via Cholesky; nullopt when
// a pivot is not safely positive.
std::optional<double> spd_log_det(const RealMatrix& g) {
  const std::size_t n = g.rows();
  RealMatrix l(n, n);
  double max_diag = 0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(g(i, i)));
  double ld = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = g(j, j);
    for (std::size_t k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 1e-13 * max_diag)) return std::nullopt;
    l(j, j) = std::sqrt(s);
    ld += std::log(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = g(i, j);
      for (std::size_t k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return 0.5 * ld;
}

Integer round_to_integer(const Rational& q) { return round_nearest(q); }
Integer round_to_integer(double x) { return Integer(std::round(x)); }

template <class T>
T from_integer(const Integer& z) {
  if constexpr (std::is_same_v<T, double>) {
    return z.get_d();
  } else {
    return T(z);
  }
}

template <class T>
struct GsoT {
  std::vector<T> bstar_sq;
  Matrix<T> mu;
};

template <class T>
GsoT<T> gso_of(const Matrix<T>& b) {
  const std::size_t n = b.rows();
  GsoT<T> g{std::vector<T>(n, T(0)), Matrix<T>(n, n)};
  Matrix<T> bstar = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      T m = dot<T>(b.row(i), bstar.row(j)) / g.bstar_sq[j];
      g.mu(i, j) = m;
      for (std::size_t c = 0; c < b.cols(); ++c) bstar(i, c) -= m * bstar(j, c);
    }
    g.mu(i, i) = T(1);
    g.bstar_sq[i] = dot<T>(bstar.row(i), bstar.row(i));
  }
  return g;
}

template <class T>
void lll_in_place(Matrix<T>& b, IntMatrix& u, const T& delta) {
  const std::size_t n = b.rows();
  if (n < 2) return;
  GsoT<T> g = gso_of(b);
  std::size_t k = 1;
  std::size_t guard = 0;
  while (k < n) {
    if (++guard > 1000000) throw LatkitError("LLL failed to converge");
    for (std::size_t jj = k; jj-- > 0;) {
      Integer q = round_to_integer(g.mu(k, jj));
      if (q == 0) continue;
      T qt = from_integer<T>(q);
      for (std::size_t c = 0; c < b.cols(); ++c) b(k, c) -= qt * b(jj, c);
      for (std::size_t c = 0; c < u.cols(); ++c) u(k, c) -= q * u(jj, c);
      for (std::size_t i = 0; i < jj; ++i) g.mu(k, i) -= qt * g.mu(jj, i);
      g.mu(k, jj) -= qt;
    }
    T lhs = g.bstar_sq[k];
    T rhs = (delta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar_sq[k - 1];
    if (lhs >= rhs) {
      ++k;
    } else {
      b.swap_rows(k, k - 1);
      u.swap_rows(k, k - 1);
      g = gso_of(b);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
}

Eigen::MatrixXd to_eigen(const RealMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticeBasis

LatticeBasis::LatticeBasis(RatMatrix rows, std::string name) : name_(std::move(name)) {
  if (rows.rows() == 0) throw InvalidBasis("empty basis");
  if (rows.rows() > rows.cols()) throw InvalidBasis("rank exceeds ambient dimension");
  exact_gram_ = gram_of(rows);
  exact_gram_det_ = determinant(*exact_gram_);
  if (*exact_gram_det_ <= 0) throw InvalidBasis("basis rows are linearly dependent");
  rows_ = to_real(rows);
  gram_ = to_real(*exact_gram_);
  log_det_ = 0.5 * log_abs(*exact_gram_det_);
  exact_ = std::move(rows);
}

LatticeBasis::LatticeBasis(RealMatrix rows, std::string name) : name_(std::move(name)) {
  if (rows.rows() == 0) throw InvalidBasis("empty basis");
  if (rows.rows() > rows.cols()) throw InvalidBasis("rank exceeds ambient dimension");
  for (double v : rows.data())
    if (!std::isfinite(v)) throw InvalidBasis("non-finite basis entry");
  rows_ = std::move(rows);
  finish_float();
}

void LatticeBasis::finish_float() {
  gram_ = gram_of(rows_);
  auto ld = spd_log_det(gram_);
  if (!ld) throw InvalidBasis("basis rows are linearly dependent");
  log_det_ = *ld;
}

LatticeBasis LatticeBasis::identity(std::size_t n) {
  return LatticeBasis(RatMatrix::identity(n), "Z" + std::to_string(n));
}

LatticeBasis LatticeBasis::diagonal(const std::vector<Rational>& entries) {
  RatMatrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return LatticeBasis(std::move(m));
}

const RatMatrix& LatticeBasis::exact_rows() const {
  if (!exact_) throw InvalidInput("basis is not in exact mode");
  return *exact_;
}

const RatMatrix& LatticeBasis::exact_gram() const {
  if (!exact_gram_) throw InvalidInput("basis is not in exact mode");
  return *exact_gram_;
}

const Rational& LatticeBasis::exact_gram_det() const {
  if (!exact_gram_det_) throw InvalidInput("basis is not in exact mode");
  return *exact_gram_det_;
}

double LatticeBasis::det() const { return std::exp(log_det_); }

bool LatticeBasis::is_orthogonal() const {
  for (std::size_t i = 0; i < rank(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      if (exact_ ? (*exact_gram_)(i, j) != 0 : gram_(i, j) != 0.0) return false;
    }
  return true;
}

bool LatticeBasis::is_diagonal() const {
  if (!full_rank()) return false;
  for (std::size_t i = 0; i < rank(); ++i)
    for (std::size_t j = 0; j < rank(); ++j) {
      if (i == j) continue;
      if (exact_ ? (*exact_)(i, j) != 0 : rows_(i, j) != 0.0) return false;
    }
  return true;
}

Determinant determinant(const LatticeBasis& basis) {
  Determinant d;
  d.log_value = basis.log_det();
  d.value = basis.det();
  if (basis.is_exact()) {
    d.squared = basis.exact_gram_det();
    Rational root;
    if (rational_sqrt(*d.squared, root)) {
      d.exact = root;
      d.value = root.get_d();
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Sublattices

double SublatticeWitness::det() const { return std::exp(log_det); }

SublatticeWitness make_witness(const LatticeBasis& parent, IntMatrix coefficients,
                               bool primitive) {
  if (coefficients.cols() != parent.rank()) throw InvalidInput("witness width != parent rank");
  SublatticeWitness w;
  w.rank = coefficients.rows();
  w.primitive = primitive;
  if (w.rank == 0) {
    w.coefficients = IntMatrix(0, parent.rank());
    w.log_det = 0;
    if (parent.is_exact()) w.gram_det = Rational(1);
    return w;
  }
  if (parent.is_exact()) {
    RatMatrix c = to_rational(coefficients);
    RatMatrix g = c * parent.exact_gram() * c.transpose();
    Rational gd = determinant(g);
    if (gd <= 0) throw InvalidInput("sublattice generators are dependent");
    w.gram_det = gd;
    w.log_det = 0.5 * log_abs(gd);
  } else {
    RealMatrix c = to_real(coefficients);
    RealMatrix g = c * parent.gram() * c.transpose();
    auto ld = spd_log_det(g);
    if (!ld) throw InvalidInput("sublattice generators are dependent");
    w.log_det = *ld;
  }
  w.coefficients = std::move(coefficients);
  return w;
}

LatticeBasis sublattice_basis(const LatticeBasis& parent, const SublatticeWitness& sub) {
  if (parent.is_exact()) {
    return LatticeBasis(to_rational(sub.coefficients) * parent.exact_rows());
  }
  return LatticeBasis(to_real(sub.coefficients) * parent.rows());
}

// ---------------------------------------------------------------------------
// Integer normal forms

HnfResult hnf_with_transform(const IntMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  HnfResult r{m, IntMatrix::identity(rows), 0};
  IntMatrix& h = r.h;
  IntMatrix& u = r.transform;
  auto sub_row = [&](std::size_t dst, std::size_t src, const Integer& q) {
    for (std::size_t j = 0; j < cols; ++j) h(dst, j) -= q * h(src, j);
    for (std::size_t j = 0; j < rows; ++j) u(dst, j) -= q * u(src, j);
  };
  auto negate_row = [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) h(i, j) = -h(i, j);
    for (std::size_t j = 0; j < rows; ++j) u(i, j) = -u(i, j);
  };
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < cols && pivot_row < rows; ++c) {
    while (true) {
      // smallest nonzero magnitude in column c at or below pivot_row
      std::size_t best = rows;
      for (std::size_t i = pivot_row; i < rows; ++i) {
        if (h(i, c) == 0) continue;
        if (best == rows || abs(h(i, c)) < abs(h(best, c))) best = i;
      }
      if (best == rows) break;
      h.swap_rows(best, pivot_row);
      u.swap_rows(best, pivot_row);
      bool done = true;
      for (std::size_t i = pivot_row + 1; i < rows; ++i) {
        if (h(i, c) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(pivot_row, c).get_mpz_t());
        sub_row(i, pivot_row, q);
        if (h(i, c) != 0) done = false;
      }
      if (done) break;
    }
    if (h(pivot_row, c) == 0) continue;
    if (h(pivot_row, c) < 0) negate_row(pivot_row);
    for (std::size_t i = 0; i < pivot_row; ++i) {
      Integer q;
      mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(pivot_row, c).get_mpz_t());
      if (q != 0) sub_row(i, pivot_row, q);
    }
    ++pivot_row;
  }
  r.rank = pivot_row;
  return r;
}

IntMatrix hnf(const IntMatrix& m) {
  HnfResult r = hnf_with_transform(m);
  return r.h.row_block(0, r.rank);
}

IntMatrix integer_kernel(const IntMatrix& m) {
  const std::size_t d = m.cols();
  if (m.rows() == 0) return IntMatrix::identity(d);
  HnfResult r = hnf_with_transform(m.transpose());
  IntMatrix k(0, d);
  for (std::size_t i = r.rank; i < d; ++i) k.append_row(r.transform.row(i));
  if (k.rows() == 0) return IntMatrix(0, d);
  return hnf(k);
}

IntMatrix saturation(const IntMatrix& m) {
  const std::size_t d = m.cols();
  IntMatrix k = integer_kernel(m);
  if (k.rows() == 0) return IntMatrix::identity(d);
  IntMatrix s = integer_kernel(k);
  return s;
}

bool contained_in_span(const IntMatrix& inner, const IntMatrix& outer) {
  if (inner.rows() == 0) return true;
  RatMatrix o = to_rational(outer);
  std::size_t base = outer.rows() ? matrix_rank(o) : 0;
  RatMatrix both = o;
  if (both.rows() == 0) both = RatMatrix(0, inner.cols());
  RatMatrix in = to_rational(inner);
  for (std::size_t i = 0; i < in.rows(); ++i) both.append_row(in.row(i));
  return matrix_rank(both) == base;
}

// ---------------------------------------------------------------------------
// Derived lattices

LatticeBasis dual_basis(const LatticeBasis& basis) {
  if (basis.is_exact()) {
    RatMatrix d = inverse(basis.exact_gram()) * basis.exact_rows();
    return LatticeBasis(std::move(d), basis.name().empty() ? "" : basis.name() + "_dual");
  }
  RealMatrix d = inverse(basis.gram()) * basis.rows();
  return LatticeBasis(std::move(d), basis.name().empty() ? "" : basis.name() + "_dual");
}

LatticeBasis project_orthogonal(const LatticeBasis& basis, const SublatticeWitness& sub) {
  const std::size_t d = basis.rank();
  const std::size_t k = sub.coefficients.rows();
  if (k == 0) return basis;
  if (k >= d) throw InvalidInput("quotient by a full-rank sublattice is trivial");
  if (hnf(sub.coefficients) != hnf(saturation(sub.coefficients))) {
    throw NotPrimitive("sublattice is not primitive");
  }
  // Complete the primitive rows to a unimodular matrix W; the last d - k rows
  // of W project onto a basis of the quotient.
  HnfResult r = hnf_with_transform(sub.coefficients.transpose());
  RatMatrix uinv = inverse(to_rational(r.transform));
  IntMatrix completion(d - k, d);
  for (std::size_t i = k; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) completion(i - k, j) = uinv(j, i).get_num();

  if (basis.is_exact()) {
    RatMatrix s = to_rational(sub.coefficients) * basis.exact_rows();
    RatMatrix w = to_rational(completion) * basis.exact_rows();
    RatMatrix coeff = w * s.transpose() * inverse(gram_of(s));
    RatMatrix proj = w;
    RatMatrix corr = coeff * s;
    for (std::size_t i = 0; i < proj.rows(); ++i)
      for (std::size_t j = 0; j < proj.cols(); ++j) proj(i, j) -= corr(i, j);
    return LatticeBasis(std::move(proj));
  }
  RealMatrix s = to_real(sub.coefficients) * basis.rows();
  RealMatrix w = to_real(completion) * basis.rows();
  RealMatrix corr = w * s.transpose() * inverse(gram_of(s)) * s;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) -= corr(i, j);
  return LatticeBasis(std::move(w));
}

LatticeBasis direct_sum(const LatticeBasis& a, const LatticeBasis& b) {
  const std::size_t ra = a.rank(), rb = b.rank(), na = a.ambient_dim(), nb = b.ambient_dim();
  std::string name = a.name().empty() || b.name().empty() ? "" : a.name() + "+" + b.name();
  if (a.is_exact() && b.is_exact()) {
    RatMatrix m(ra + rb, na + nb);
    for (std::size_t i = 0; i < ra; ++i)
      for (std::size_t j = 0; j < na; ++j) m(i, j) = a.exact_rows()(i, j);
    for (std::size_t i = 0; i < rb; ++i)
      for (std::size_t j = 0; j < nb; ++j) m(ra + i, na + j) = b.exact_rows()(i, j);
    return LatticeBasis(std::move(m), name);
  }
  RealMatrix m(ra + rb, na + nb);
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < na; ++j) m(i, j) = a.rows()(i, j);
  for (std::size_t i = 0; i < rb; ++i)
    for (std::size_t j = 0; j < nb; ++j) m(ra + i, na + j) = b.rows()(i, j);
  return LatticeBasis(std::move(m), name);
}

SublatticeWitness saturate(const LatticeBasis& basis, const SublatticeWitness& sub) {
  if (sub.coefficients.rows() == 0) return make_witness(basis, IntMatrix(0, basis.rank()), true);
  return make_witness(basis, hnf(saturation(sub.coefficients)), true);
}

// ---------------------------------------------------------------------------
// Reduction

LllResult lll_reduce(const LatticeBasis& basis, double delta) {
  if (!(delta > 0.25 && delta < 1.0)) throw InvalidInput("LLL delta must lie in (1/4, 1)");
  IntMatrix u = IntMatrix::identity(basis.rank());
  if (basis.is_exact()) {
    RatMatrix b = basis.exact_rows();
    lll_in_place<Rational>(b, u, rational_from_double(delta));
    LatticeBasis out(std::move(b), basis.name());
    return {std::move(out), std::move(u)};
  }
  RealMatrix b = basis.rows();
  lll_in_place<double>(b, u, delta);
  LatticeBasis out(std::move(b), basis.name());
  return {std::move(out), std::move(u)};
}

bool is_lll_reduced(const LatticeBasis& basis, double delta, double tol) {
  if (basis.is_exact()) {
    GsoT<Rational> g = gso_of(basis.exact_rows());
    Rational half(1, 2), dq = rational_from_double(delta);
    for (std::size_t i = 0; i < basis.rank(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (abs(g.mu(i, j)) > half) return false;
    for (std::size_t k = 1; k < basis.rank(); ++k) {
      if (g.bstar_sq[k] < (dq - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar_sq[k - 1]) return false;
    }
    return true;
  }
  Gso g = gram_schmidt(basis.rows());
  for (std::size_t i = 0; i < basis.rank(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(g.mu(i, j)) > 0.5 + tol) return false;
  for (std::size_t k = 1; k < basis.rank(); ++k) {
    double rhs = (delta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar_sq[k - 1];
    if (g.bstar_sq[k] < rhs * (1 - tol)) return false;
  }
  return true;
}

Gso gram_schmidt(const RealMatrix& rows) {
  const std::size_t n = rows.rows();
  Gso g{std::vector<double>(n), RealMatrix(n, n), rows};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double m = dot<double>(rows.row(i), g.bstar.row(j)) / g.bstar_sq[j];
      g.mu(i, j) = m;
      for (std::size_t c = 0; c < rows.cols(); ++c) g.bstar(i, c) -= m * g.bstar(j, c);
    }
    g.mu(i, i) = 1;
    g.bstar_sq[i] = dot<double>(g.bstar.row(i), g.bstar.row(i));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Changes of coordinates

LatticeBasis scaled(const LatticeBasis& basis, const Rational& factor) {
  if (factor == 0) throw InvalidInput("scale factor must be nonzero");
  if (basis.is_exact()) return LatticeBasis(factor * basis.exact_rows(), basis.name());
  return LatticeBasis(factor.get_d() * basis.rows(), basis.name());
}

LatticeBasis scaled(const LatticeBasis& basis, double factor) {
  if (!(factor != 0) || !std::isfinite(factor)) throw InvalidInput("bad scale factor");
  return LatticeBasis(factor * basis.rows(), basis.name());
}

LatticeBasis transformed(const LatticeBasis& basis, const RealMatrix& m) {
  return LatticeBasis(basis.rows() * m, basis.name());
}

LatticeBasis to_float(const LatticeBasis& basis) {
  return LatticeBasis(RealMatrix(basis.rows()), basis.name());
}

LatticeBasis span_coordinates(const LatticeBasis& basis) {
  if (basis.full_rank()) return basis;
  Eigen::MatrixXd bt = to_eigen(basis.rows()).transpose();  // n x d
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(bt);
  const auto d = static_cast<Eigen::Index>(basis.rank());
  Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  RealMatrix out(basis.rank(), basis.rank());
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = r(j, i);
  return LatticeBasis(std::move(out), basis.name());
}

}  // namespace latkit
