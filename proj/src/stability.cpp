#include "latkit/stability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "latkit/enumerate.hpp"

namespace latkit {

namespace {

constexpr double kFloatTie = 1e-10;
constexpr double kPruneSlack = 1e-9;

struct SearchOutcome {
  std::vector<SublatticeWitness> ties;  // minimizers found, HNF coefficients
  bool certified = false;
  double radius = 0;
  std::uint64_t candidates = 0;
};

bool lex_less(const IntMatrix& a, const IntMatrix& b) {
  return std::lexicographical_compare(a.data().begin(), a.data().end(), b.data().begin(), b.data().end());
}

// -1, 0, +1 comparing the determinants of two witnesses of the same parent.
int compare_det(const SublatticeWitness& a, const SublatticeWitness& b) {
  if (a.gram_det && b.gram_det) {
    const int c = cmp(*a.gram_det, *b.gram_det);
    return (c > 0) - (c < 0);
  }
  const double tol = kFloatTie * std::max(1.0, std::abs(a.log_det));
  if (a.log_det < b.log_det - tol) return -1;
  if (a.log_det > b.log_det + tol) return 1;
  return 0;
}

SublatticeWitness canonical_min(std::vector<SublatticeWitness> ws) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ws.size(); ++i) {
    int c = compare_det(ws[i], ws[best]);
    if (c < 0 || (c == 0 && lex_less(ws[i].coefficients, ws[best].coefficients))) best = i;
  }
  return std::move(ws[best]);
}

// Determinant of a small integer matrix by fraction-free elimination.
__int128 bareiss(std::vector<__int128> a, std::size_t k) {
  __int128 prev = 1;
  int sign = 1;
  for (std::size_t p = 0; p < k; ++p) {
    if (a[p * k + p] == 0) {
      std::size_t r = p + 1;
      while (r < k && a[r * k + p] == 0) ++r;
      if (r == k) return 0;
      for (std::size_t j = 0; j < k; ++j) std::swap(a[p * k + j], a[r * k + j]);
      sign = -sign;
    }
    for (std::size_t i = p + 1; i < k; ++i)
      for (std::size_t j = p + 1; j < k; ++j)
        a[i * k + j] = (a[i * k + j] * a[p * k + p] - a[i * k + p] * a[p * k + j]) / prev;
    prev = a[p * k + p];
  }
  return sign * a[(k - 1) * k + (k - 1)];
}

// gcd of the maximal minors: the index of the generated lattice in its saturation.
std::uint64_t minor_gcd(const std::vector<const std::vector<std::int64_t>*>& rows, std::size_t d) {
  const std::size_t k = rows.size();
  std::uint64_t g = 0;
  std::vector<__int128> m(k * k);
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::size_t c = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!(mask >> j & 1u)) continue;
      for (std::size_t i = 0; i < k; ++i) m[i * k + c] = (*rows[i])[j];
      ++c;
    }
    __int128 v = bareiss(m, k);
    if (v < 0) v = -v;
    g = std::gcd(g, static_cast<std::uint64_t>(v));
    if (g == 1) return 1;
  }
  return g;
}

IntMatrix int_rows(const std::vector<const std::vector<std::int64_t>*>& rows, std::size_t d) {
  IntMatrix m(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = static_cast<long>((*rows[i])[j]);
  return m;
}

struct ListVector {
  std::vector<std::int64_t> reduced;  // coefficients in the reduced basis
  std::vector<double> coords;
  double norm = 0;
};

class DenseSearch {
 public:
  DenseSearch(const LatticeBasis& basis, std::size_t k, const SearchOptions& opts)
      : basis_(basis), k_(k), opts_(opts), en_(basis), d_(basis.rank()) {}

  SearchOutcome run();

 private:
  void consider(const std::vector<const std::vector<std::int64_t>*>& rows, double log_gram);
  void descend(std::size_t depth, std::size_t start, double prefix);
  double bound() const { return hermite_power(k_) * std::exp(best_log_) * (1 + kPruneSlack); }

  const LatticeBasis& basis_;
  std::size_t k_;
  SearchOptions opts_;
  Enumerator en_;
  std::size_t d_;

  std::vector<ListVector> list_;
  std::vector<SublatticeWitness> ties_;
  std::set<std::vector<Integer>> seen_;
  double best_log_ = 0;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;

  std::vector<const std::vector<std::int64_t>*> chosen_;
  std::vector<std::vector<double>> gs_coef_;  // orthogonalized coefficient vectors
  std::vector<std::vector<double>> gs_pt_;    // orthogonalized lattice vectors
  std::vector<double> gs_pt_sq_;
};

void DenseSearch::consider(const std::vector<const std::vector<std::int64_t>*>& rows, double log_gram) {
  bool small = true;
  for (auto* r : rows)
    for (auto v : *r) small = small && std::abs(v) < (1 << 16);
  double log_det = 0.5 * log_gram;
  if (small && k_ <= 8 && d_ <= 20) {
    log_det -= std::log(static_cast<double>(minor_gcd(rows, d_)));
    if (log_det > best_log_ + kFloatTie * std::max(1.0, std::abs(best_log_)) + 1e-9) return;
  }
  IntMatrix sat = saturation(int_rows(rows, d_));
  // map reduced-basis coefficients back to the input basis
  IntMatrix in(k_, d_);
  for (std::size_t i = 0; i < k_; ++i) {
    std::vector<std::int64_t> r(d_);
    for (std::size_t j = 0; j < d_; ++j) r[j] = to_int64(sat(i, j));
    auto c = en_.input_coefficients(r);
    for (std::size_t j = 0; j < d_; ++j) in(i, j) = static_cast<long>(c[j]);
  }
  IntMatrix h = hnf(in);
  if (!seen_.insert(h.data()).second) return;
  SublatticeWitness w = make_witness(basis_, std::move(h), true);
  if (ties_.empty()) {
    ties_.push_back(std::move(w));
  } else {
    int c = compare_det(w, ties_.front());
    if (c < 0) {
      ties_.clear();
      ties_.push_back(std::move(w));
    } else if (c == 0) {
      ties_.push_back(std::move(w));
    }
  }
  best_log_ = std::min(best_log_, ties_.front().log_det);
}

void DenseSearch::descend(std::size_t depth, std::size_t start, double prefix) {
  const std::size_t rest = k_ - depth;
  for (std::size_t t = start; t + rest <= list_.size(); ++t) {
    if (exhausted_) return;
    const ListVector& v = list_[t];
    if (prefix * std::pow(v.norm, static_cast<double>(rest)) > bound()) break;
    if (++nodes_ > opts_.budget) {
      exhausted_ = true;
      return;
    }
    // independence in coefficient space
    std::vector<double> rc(v.reduced.begin(), v.reduced.end());
    double vc = 0;
    for (double x : rc) vc += x * x;
    for (const auto& q : gs_coef_) {
      double num = 0, den = 0;
      for (std::size_t j = 0; j < d_; ++j) num += rc[j] * q[j], den += q[j] * q[j];
      for (std::size_t j = 0; j < d_; ++j) rc[j] -= num / den * q[j];
    }
    double rn = 0;
    for (double x : rc) rn += x * x;
    if (rn <= 1e-9 * vc) continue;

    std::vector<double> rp = v.coords;
    for (std::size_t i = 0; i < gs_pt_.size(); ++i) {
      double num = 0;
      for (std::size_t j = 0; j < rp.size(); ++j) num += rp[j] * gs_pt_[i][j];
      for (std::size_t j = 0; j < rp.size(); ++j) rp[j] -= num / gs_pt_sq_[i] * gs_pt_[i][j];
    }
    double rpn = 0;
    for (double x : rp) rpn += x * x;

    chosen_.push_back(&v.reduced);
    gs_coef_.push_back(std::move(rc));
    gs_pt_.push_back(std::move(rp));
    gs_pt_sq_.push_back(rpn);
    if (rest == 1) {
      double lg = 0;
      for (double s : gs_pt_sq_) lg += std::log(s);
      consider(chosen_, lg);
    } else {
      descend(depth + 1, t + 1, prefix * v.norm);
    }
    chosen_.pop_back();
    gs_coef_.pop_back();
    gs_pt_.pop_back();
    gs_pt_sq_.pop_back();
  }
}

SearchOutcome DenseSearch::run() {
  SearchOutcome out;
  // the first k reduced rows span a primitive sublattice: the starting bound
  {
    IntMatrix c(k_, d_);
    for (std::size_t i = 0; i < k_; ++i) {
      std::vector<std::int64_t> e(d_, 0);
      e[i] = 1;
      auto r = en_.input_coefficients(e);
      for (std::size_t j = 0; j < d_; ++j) c(i, j) = static_cast<long>(r[j]);
    }
    IntMatrix h = hnf(c);
    seen_.insert(h.data());
    ties_.push_back(make_witness(basis_, std::move(h), true));
    best_log_ = ties_.front().log_det;
  }

  const double lambda1 = shortest_vector(basis_).norm;
  const double radius = opts_.radius_slack * bound() / std::pow(lambda1, static_cast<double>(k_ - 1));
  out.radius = radius;
  if (en_.predicted_count(radius) > static_cast<double>(opts_.budget)) {
    out.ties = std::move(ties_);
    return out;
  }
  double bound_sq = radius * radius;
  const std::vector<double> origin(basis_.ambient_dim(), 0.0);
  en_.for_each(origin, &bound_sq, [&](std::span<const std::int64_t> x, double dist_sq) {
    auto nz = std::find_if(x.begin(), x.end(), [](std::int64_t v) { return v != 0; });
    if (nz == x.end() || *nz < 0) return;  // origin, or the negative of a listed vector
    ListVector lv;
    lv.reduced.assign(x.begin(), x.end());
    lv.coords = en_.coordinates(x);
    lv.norm = std::sqrt(dist_sq);
    list_.push_back(std::move(lv));
  });
  std::sort(list_.begin(), list_.end(), [](const ListVector& a, const ListVector& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return a.reduced < b.reduced;
  });
  descend(0, 0, 1.0);
  out.candidates = nodes_;
  out.certified = !exhausted_ && opts_.radius_slack >= 1.0;
  out.ties = std::move(ties_);
  return out;
}

SearchOutcome search(const LatticeBasis& basis, std::size_t k, const SearchOptions& opts) {
  const std::size_t d = basis.rank();
  SearchOutcome out;
  if (k == 0) {
    out.ties.push_back(make_witness(basis, IntMatrix(0, d), true));
    out.certified = true;
    return out;
  }
  if (k == d) {
    out.ties.push_back(make_witness(basis, IntMatrix::identity(d), true));
    out.certified = true;
    return out;
  }
  if (opts.use_duality && d - k < k) {
    // M = L intersected with the orthogonal complement of M*, det(M) = det(L) det(M*)
    LatticeBasis dual = dual_basis(basis);
    SearchOptions inner = opts;
    inner.use_duality = false;
    SearchOutcome ds = search(dual, d - k, inner);
    out.certified = ds.certified;
    out.radius = ds.radius;
    out.candidates = ds.candidates;
    for (const auto& w : ds.ties) out.ties.push_back(make_witness(basis, hnf(integer_kernel(w.coefficients)), true));
    return out;
  }
  return DenseSearch(basis, k, opts).run();
}

Rational pow_q(const Rational& q, unsigned long e) {
  Integer n, m;
  mpz_pow_ui(n.get_mpz_t(), q.get_num_mpz_t(), e);
  mpz_pow_ui(m.get_mpz_t(), q.get_den_mpz_t(), e);
  Rational r(n, m);
  r.canonicalize();
  return r;
}

// Exact n-th root of a positive rational, when it exists.
bool rational_root(const Rational& q, unsigned long n, Rational& out) {
  Integer a, b;
  if (!mpz_root(a.get_mpz_t(), q.get_num_mpz_t(), n)) return false;
  if (!mpz_root(b.get_mpz_t(), q.get_den_mpz_t(), n)) return false;
  out = Rational(a, b);
  out.canonicalize();
  return true;
}

bool below_one(const SublatticeWitness& w) {
  if (w.gram_det) return *w.gram_det < 1;
  return w.log_det < -kFloatTie;
}

}  // namespace

double hermite_power(std::size_t k) {
  static const double table[] = {1.0,
                                 1.0,
                                 2.0 / std::sqrt(3.0),
                                 std::sqrt(2.0),
                                 2.0,
                                 std::sqrt(8.0),
                                 std::sqrt(64.0 / 3.0),
                                 8.0,
                                 16.0};
  if (k <= 8) return table[k];
  return std::pow(1.0 + k / 4.0, k / 2.0);
}

bool is_primitive(const LatticeBasis& basis, const SublatticeWitness& sub) {
  (void)basis;
  if (sub.coefficients.rows() == 0) return true;
  return hnf(saturation(sub.coefficients)) == hnf(sub.coefficients);
}

DensestResult densest_sublattice(const LatticeBasis& basis, std::size_t k, const SearchOptions& opts) {
  if (k > basis.rank()) throw InvalidInput("sublattice rank exceeds the lattice rank");
  SearchOutcome s = search(basis, k, opts);
  DensestResult r;
  r.witness = canonical_min(std::move(s.ties));
  r.certified = s.certified;
  r.search_radius = s.radius;
  r.candidates = s.candidates;
  return r;
}

bool CanonicalPlot::all_certified() const {
  return std::all_of(certified.begin(), certified.end(), [](bool b) { return b; });
}

CanonicalPlot canonical_plot(const LatticeBasis& basis, const SearchOptions& opts) {
  CanonicalPlot p;
  for (std::size_t k = 0; k <= basis.rank(); ++k) {
    DensestResult r = densest_sublattice(basis, k, opts);
    p.min_log_det.push_back(k == 0 ? 0.0 : r.witness.log_det);
    p.witness.push_back(std::move(r.witness));
    p.certified.push_back(r.certified);
  }
  return p;
}

std::vector<std::size_t> hull_vertices(const LatticeBasis& basis, const CanonicalPlot& plot) {
  const std::size_t n = plot.witness.size();
  const bool exact = basis.is_exact() &&
                     std::all_of(plot.witness.begin(), plot.witness.end(), [](const auto& w) { return w.gram_det.has_value(); });
  // true when b is not strictly below the segment from a to c
  auto not_convex = [&](std::size_t a, std::size_t b, std::size_t c) {
    if (exact) {
      const Rational& ga = *plot.witness[a].gram_det;
      const Rational& gb = *plot.witness[b].gram_det;
      const Rational& gc = *plot.witness[c].gram_det;
      return pow_q(gb / ga, c - b) >= pow_q(gc / gb, b - a);
    }
    const double s1 = (plot.min_log_det[b] - plot.min_log_det[a]) / static_cast<double>(b - a);
    const double s2 = (plot.min_log_det[c] - plot.min_log_det[b]) / static_cast<double>(c - b);
    return s1 >= s2 - kFloatTie;
  };
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2 && not_convex(hull[hull.size() - 2], hull.back(), i)) hull.pop_back();
    hull.push_back(i);
  }
  return hull;
}

FiltrationChain canonical_filtration(const LatticeBasis& basis, const CanonicalPlot& plot) {
  FiltrationChain f;
  f.certified = plot.all_certified();
  for (std::size_t v : hull_vertices(basis, plot)) f.chain.push_back(plot.witness[v]);
  for (std::size_t i = 1; i < f.chain.size(); ++i) {
    const auto& lo = f.chain[i - 1];
    const auto& hi = f.chain[i];
    if (!contained_in_span(lo.coefficients, hi.coefficients)) f.nested = false;
    const double r = static_cast<double>(hi.rank - lo.rank);
    const double slope = (hi.log_det - lo.log_det) / r;
    f.slopes.push_back(slope);
    f.scales.push_back(std::exp(-slope));
  }
  return f;
}

FiltrationChain canonical_filtration(const LatticeBasis& basis, const SearchOptions& opts) {
  return canonical_filtration(basis, canonical_plot(basis, opts));
}

LatticeBasis filtration_quotient(const LatticeBasis& basis, const FiltrationChain& f, std::size_t i) {
  if (i == 0 || i >= f.chain.size()) throw InvalidInput("filtration step out of range");
  const auto& lo = f.chain[i - 1];
  const auto& hi = f.chain[i];
  LatticeBasis upper = sublattice_basis(basis, hi);
  // coordinates of the lower generators in the upper basis
  RatMatrix ch = to_rational(hi.coefficients);
  RatMatrix x = to_rational(lo.coefficients) * ch.transpose() * inverse(ch * ch.transpose());
  IntMatrix xi(x.rows(), x.cols());
  for (std::size_t a = 0; a < x.rows(); ++a)
    for (std::size_t b = 0; b < x.cols(); ++b) {
      if (x(a, b).get_den() != 1) throw NotPrimitive("filtration is not nested");
      xi(a, b) = x(a, b).get_num();
    }
  LatticeBasis q = project_orthogonal(upper, make_witness(upper, xi, true));
  const unsigned long r = hi.rank - lo.rank;
  if (q.is_exact()) {
    // alpha^2 = det(Q)^{-2/r}, rational when the r-th root of det(Q)^2 is
    Rational root;
    if (rational_root(q.exact_gram_det(), r, root)) {
      Rational alpha;
      if (rational_sqrt(1 / root, alpha)) return scaled(q, alpha);
    }
  }
  return scaled(q, std::exp(-q.log_det() / static_cast<double>(r)));
}

bool all_sublattices_at_least_one(const LatticeBasis& basis, const CanonicalPlot& plot) {
  (void)basis;
  for (std::size_t k = 1; k < plot.witness.size(); ++k)
    if (below_one(plot.witness[k])) return false;
  return true;
}

StabilityCertificate is_stable(const LatticeBasis& basis, const CanonicalPlot& plot) {
  StabilityCertificate c;
  c.det_one_check = basis.is_exact() ? basis.exact_gram_det() == 1 : std::abs(basis.det() - 1) <= 1e-9;
  c.search_certified = plot.all_certified();
  for (std::size_t k = 1; k < plot.witness.size(); ++k) {
    if (below_one(plot.witness[k])) {
      c.failing_witness = plot.witness[k];
      break;
    }
  }
  c.stable = c.det_one_check && !c.failing_witness;
  return c;
}

StabilityCertificate is_stable(const LatticeBasis& basis, const SearchOptions& opts) {
  return is_stable(basis, canonical_plot(basis, opts));
}

CertifiedValue eta_det(const CanonicalPlot& plot) {
  CertifiedValue v{0, plot.all_certified()};
  for (std::size_t k = 1; k < plot.min_log_det.size(); ++k)
    v.value = std::max(v.value, std::exp(-plot.min_log_det[k] / static_cast<double>(k)));
  return v;
}

CertifiedValue eta_det(const LatticeBasis& basis, const SearchOptions& opts) {
  return eta_det(canonical_plot(basis, opts));
}

CertifiedValue mu_det(const LatticeBasis& basis, const SearchOptions& opts) {
  CanonicalPlot p = canonical_plot(dual_basis(basis), opts);
  CertifiedValue v{0, p.all_certified()};
  for (std::size_t k = 1; k < p.min_log_det.size(); ++k) {
    const double kk = static_cast<double>(k);
    v.value = std::max(v.value, std::sqrt(kk) * std::exp(-p.min_log_det[k] / kk));
  }
  return v;
}

UncrossingReport uncrossing_check(const LatticeBasis& basis, const SublatticeWitness& l1,
                                  const SublatticeWitness& l2) {
  if (!is_primitive(basis, l1) || !is_primitive(basis, l2)) throw NotPrimitive("uncrossing needs primitive sublattices");
  const std::size_t d = basis.rank();
  UncrossingReport r;
  // primitive sublattices are kernels of their orthogonal integer relations
  IntMatrix rel = integer_kernel(l1.coefficients);
  IntMatrix k2 = integer_kernel(l2.coefficients);
  for (std::size_t i = 0; i < k2.rows(); ++i) rel.append_row(k2.row(i));
  IntMatrix meet = rel.rows() ? integer_kernel(rel) : IntMatrix::identity(d);
  r.meet = make_witness(basis, meet.rows() ? hnf(meet) : IntMatrix(0, d), true);

  IntMatrix both = l1.coefficients;
  if (both.rows() == 0) both = IntMatrix(0, d);
  for (std::size_t i = 0; i < l2.coefficients.rows(); ++i) both.append_row(l2.coefficients.row(i));
  r.join = make_witness(basis, hnf(both));
  r.saturated_join = saturate(basis, r.join);

  r.det1 = l1.det();
  r.det2 = l2.det();
  r.det_meet = r.meet.det();
  r.det_join = r.join.det();
  r.rank_identity = l1.rank + l2.rank == r.meet.rank + r.join.rank;
  if (l1.gram_det && l2.gram_det && r.meet.gram_det && r.join.gram_det) {
    r.inequality = *r.meet.gram_det * *r.join.gram_det <= *l1.gram_det * *l2.gram_det;
  } else {
    r.inequality = r.meet.log_det + r.join.log_det <= l1.log_det + l2.log_det + 1e-9;
  }
  return r;
}

double reverse_amgm_bound(const std::vector<double>& a, const std::vector<int>& d) {
  if (a.empty() || a.size() != d.size()) throw InvalidInput("a and d must be nonempty and of equal length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0) || d[i] <= 0) throw InvalidInput("a must be positive and d positive integers");
    if (i > 0 && !(a[i] > a[i - 1])) throw InvalidInput("a must be strictly increasing");
  }
  const std::size_t k = a.size();
  double best = 0;
  double m = 0, log_prod = 0;
  for (std::size_t j = k; j-- > 0;) {
    m += d[j];
    log_prod += d[j] * std::log(a[j]);
    best = std::max(best, m * std::exp(log_prod / m));
  }
  return 2 * std::numbers::e * std::ceil(std::log(2 * m)) * best;
}

}  // namespace latkit
