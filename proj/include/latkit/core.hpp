#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "latkit/matrix.hpp"
#include "latkit/rational.hpp"

namespace latkit {

enum class ArithmeticMode { exact, floating };

/// A lattice given by linearly independent basis rows in R^n.
///
/// Exact bases keep rational rows and derive every determinant exactly; float
/// bases keep only doubles. A double view of the rows is always available for
/// the enumeration and sampling kernels.
class LatticeBasis {
 public:
  LatticeBasis() = default;
  explicit LatticeBasis(RatMatrix rows, std::string name = {});
  explicit LatticeBasis(RealMatrix rows, std::string name = {});

  static LatticeBasis identity(std::size_t n);
  static LatticeBasis diagonal(const std::vector<Rational>& entries);

  ArithmeticMode mode() const { return exact_ ? ArithmeticMode::exact : ArithmeticMode::floating; }
  bool is_exact() const { return exact_.has_value(); }
  std::size_t rank() const { return rows_.rows(); }
  std::size_t ambient_dim() const { return rows_.cols(); }
  bool full_rank() const { return rank() == ambient_dim(); }

  const RealMatrix& rows() const { return rows_; }
  const RatMatrix& exact_rows() const;
  const RealMatrix& gram() const { return gram_; }
  const RatMatrix& exact_gram() const;

  /// det(L)^2 = det(B B^T), exact mode only.
  const Rational& exact_gram_det() const;
  double log_det() const { return log_det_; }
  double det() const;

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  /// True when every off-diagonal Gram entry is exactly zero.
  bool is_orthogonal() const;
  /// True when the rows form a diagonal square matrix.
  bool is_diagonal() const;

 private:
  void finish_float();

  std::string name_;
  RealMatrix rows_;
  RealMatrix gram_;
  std::optional<RatMatrix> exact_;
  std::optional<RatMatrix> exact_gram_;
  std::optional<Rational> exact_gram_det_;
  double log_det_ = 0;
};

/// det(L) with the exact value when it is rational.
struct Determinant {
  double value = 0;
  double log_value = 0;
  std::optional<Rational> squared;  // exact mode
  std::optional<Rational> exact;    // exact mode and det^2 a rational square
};

Determinant determinant(const LatticeBasis& basis);

/// A sublattice expressed by integer coefficient rows in the parent basis.
struct SublatticeWitness {
  IntMatrix coefficients;  // k x d
  std::size_t rank = 0;
  double log_det = 0;
  std::optional<Rational> gram_det;  // det(L')^2 when the parent is exact
  bool primitive = false;

  double det() const;
};

/// Builds a witness and its determinant data. Throws InvalidInput when the
/// rows are dependent.
SublatticeWitness make_witness(const LatticeBasis& parent, IntMatrix coefficients,
                               bool primitive = false);

/// Basis rows (coefficients * B) of the sublattice, same arithmetic mode.
LatticeBasis sublattice_basis(const LatticeBasis& parent, const SublatticeWitness& sub);

/// Row-style Hermite normal form: upper echelon, positive pivots, entries
/// above each pivot reduced into [0, pivot). Zero rows are dropped.
IntMatrix hnf(const IntMatrix& m);

struct HnfResult {
  IntMatrix h;          // same shape as input, zero rows at the bottom
  IntMatrix transform;  // unimodular, transform * input == h
  std::size_t rank = 0;
};
HnfResult hnf_with_transform(const IntMatrix& m);

/// Z-basis of { x in Z^d : m x^T = 0 }, as rows.
IntMatrix integer_kernel(const IntMatrix& m);

/// Z^d intersected with the rational row span of m.
IntMatrix saturation(const IntMatrix& m);

LatticeBasis dual_basis(const LatticeBasis& basis);

/// The quotient L / L' as the projection of L orthogonal to span(L').
/// Throws NotPrimitive unless L' is primitive in L.
LatticeBasis project_orthogonal(const LatticeBasis& basis, const SublatticeWitness& sub);

LatticeBasis direct_sum(const LatticeBasis& a, const LatticeBasis& b);

/// Primitive closure L intersected with span(L'), returned in HNF.
SublatticeWitness saturate(const LatticeBasis& basis, const SublatticeWitness& sub);

struct LllResult {
  LatticeBasis basis;
  IntMatrix transform;  // reduced rows = transform * input rows
};

/// LLL with Lovasz parameter delta in (1/4, 1). Exact bases are reduced in
/// rational arithmetic, float bases in double.
LllResult lll_reduce(const LatticeBasis& basis, double delta = 0.99);

/// Whether the rows satisfy size reduction (|mu| <= 1/2 + tol) and the Lovasz
/// condition for delta.
bool is_lll_reduced(const LatticeBasis& basis, double delta, double tol = 1e-9);

/// Gram-Schmidt data in double precision: squared norms ||b*_i||^2 and the
/// coefficients mu(i, j) = <b_i, b*_j> / ||b*_j||^2 for j < i.
struct Gso {
  std::vector<double> bstar_sq;
  RealMatrix mu;
  RealMatrix bstar;
};
Gso gram_schmidt(const RealMatrix& rows);

LatticeBasis scaled(const LatticeBasis& basis, const Rational& factor);
LatticeBasis scaled(const LatticeBasis& basis, double factor);

/// rows * m for an n x n real matrix (float result).
LatticeBasis transformed(const LatticeBasis& basis, const RealMatrix& m);

LatticeBasis to_float(const LatticeBasis& basis);

/// Isometric copy as a full-rank d x d basis (coordinates in an orthonormal
/// basis of the span).
LatticeBasis span_coordinates(const LatticeBasis& basis);

/// Whether every row of `inner` lies in the rational span of `outer`'s rows.
bool contained_in_span(const IntMatrix& inner, const IntMatrix& outer);

}  // namespace latkit
