#include "latkit/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "latkit/errors.hpp"

namespace latkit {

namespace {

struct Kahan {
  double sum = 0, comp = 0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

std::vector<double> center_or_origin(std::span<const double> center, std::size_t n) {
  if (center.empty()) return std::vector<double>(n, 0.0);
  if (center.size() != n) throw InvalidInput("center dimension does not match the ambient dimension");
  return {center.begin(), center.end()};
}

// Exact squared distance of x B to center (center taken as its exact binary value).
Rational exact_dist_sq(const LatticeBasis& basis, std::span<const std::int64_t> coeffs,
                       std::span<const double> center) {
  const auto& b = basis.exact_rows();
  Rational total(0);
  for (std::size_t j = 0; j < basis.ambient_dim(); ++j) {
    Rational v(0);
    for (std::size_t i = 0; i < basis.rank(); ++i) {
      if (coeffs[i] != 0) v += Rational(Integer(static_cast<long>(coeffs[i]))) * b(i, j);
    }
    if (!center.empty()) v -= rational_from_double(center[j]);
    total += v * v;
  }
  return total;
}

bool lex_less(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Enumerator

Enumerator::Enumerator(const LatticeBasis& basis) : input_(basis) {
  LllResult lll = lll_reduce(to_float(basis), 0.99);
  reduced_ = std::move(lll.basis);
  transform_.resize(lll.transform.rows());
  for (std::size_t i = 0; i < lll.transform.rows(); ++i) {
    for (std::size_t j = 0; j < lll.transform.cols(); ++j) {
      transform_[i].push_back(to_int64(lll.transform(i, j)));
    }
  }
  // Rebuild reduced rows from the integer transform so they are exact integer
  // combinations of the input rows.
  RealMatrix rows(basis.rank(), basis.ambient_dim());
  for (std::size_t i = 0; i < basis.rank(); ++i)
    for (std::size_t k = 0; k < basis.rank(); ++k) {
      if (transform_[i][k] == 0) continue;
      for (std::size_t j = 0; j < basis.ambient_dim(); ++j)
        rows(i, j) += static_cast<double>(transform_[i][k]) * basis.rows()(k, j);
    }
  reduced_ = LatticeBasis(std::move(rows), basis.name());
  gso_ = gram_schmidt(reduced_.rows());
  log_covolume_ = 0;
  for (double b : gso_.bstar_sq) log_covolume_ += 0.5 * std::log(b);
}

double Enumerator::predicted_count(double radius) const {
  const double d = static_cast<double>(rank());
  const double log_vol = 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1) +
                         d * std::log(std::max(radius, 1e-300));
  return std::exp(log_vol - log_covolume_);
}

std::vector<std::int64_t> Enumerator::input_coefficients(std::span<const std::int64_t> reduced) const {
  std::vector<std::int64_t> c(rank(), 0);
  for (std::size_t i = 0; i < rank(); ++i) {
    if (reduced[i] == 0) continue;
    for (std::size_t j = 0; j < rank(); ++j) c[j] += reduced[i] * transform_[i][j];
  }
  return c;
}

std::vector<double> Enumerator::coordinates(std::span<const std::int64_t> reduced) const {
  std::vector<double> y(input_.ambient_dim(), 0.0);
  for (std::size_t i = 0; i < rank(); ++i) {
    if (reduced[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += static_cast<double>(reduced[i]) * reduced_.rows()(i, j);
  }
  return y;
}

Enumerator::Frame Enumerator::project(std::span<const double> center) const {
  Frame f;
  f.tau.assign(rank(), 0.0);
  if (center.empty()) return f;
  if (center.size() != input_.ambient_dim()) {
    throw InvalidInput("center dimension does not match the ambient dimension");
  }
  double total = 0;
  for (double v : center) total += v * v;
  double captured = 0;
  for (std::size_t j = 0; j < rank(); ++j) {
    f.tau[j] = dot<double>(center, gso_.bstar.row(j)) / gso_.bstar_sq[j];
    captured += f.tau[j] * f.tau[j] * gso_.bstar_sq[j];
  }
  f.perp_sq = input_.full_rank() ? 0.0 : std::max(0.0, total - captured);
  return f;
}

std::uint64_t Enumerator::count(std::span<const double> center, double radius_sq) const {
  if (rank() == 0) return 1;
  Frame f = project(center);
  std::vector<std::int64_t> x(rank(), 0);
  std::uint64_t total = 0;
  double bound = radius_sq;
  if (f.perp_sq > bound) return 0;
  // Recurse to level 1 and count level 0 arithmetically.
  auto count_level0 = [&](double partial) {
    double c = f.tau[0];
    for (std::size_t i = 1; i < rank(); ++i) c -= static_cast<double>(x[i]) * gso_.mu(i, 0);
    const double rem = bound * (1 + kEnumSlack) - partial;
    if (rem < 0) return;
    const double half = std::sqrt(rem / gso_.bstar_sq[0]);
    const double lo = std::ceil(c - half), hi = std::floor(c + half);
    if (hi >= lo) total += static_cast<std::uint64_t>(hi - lo + 1);
  };
  if (rank() == 1) {
    count_level0(f.perp_sq);
    return total;
  }
  std::function<void(std::size_t, double)> rec = [&](std::size_t level, double partial) {
    double c = f.tau[level];
    for (std::size_t i = level + 1; i < rank(); ++i) c -= static_cast<double>(x[i]) * gso_.mu(i, level);
    const double bs = gso_.bstar_sq[level];
    const double start = std::round(c);
    for (int dir : {+1, -1}) {
      for (double xi = dir > 0 ? start : start - 1;; xi += dir) {
        const double dev = xi - c;
        const double p = partial + dev * dev * bs;
        if (p > bound * (1 + kEnumSlack)) break;
        x[level] = static_cast<std::int64_t>(xi);
        if (level == 1) {
          count_level0(p);
        } else {
          rec(level - 1, p);
        }
      }
    }
    x[level] = 0;
  };
  rec(rank() - 1, f.perp_sq);
  return total;
}

std::pair<double, std::uint64_t> Enumerator::gaussian_sum(double s, double radius) const {
  return shifted_gaussian_sum({}, s, radius);
}

std::pair<double, std::uint64_t> Enumerator::shifted_gaussian_sum(std::span<const double> center,
                                                                  double s, double radius) const {
  Kahan acc;
  std::uint64_t terms = 0;
  double bound = radius * radius;
  const double scale = std::numbers::pi / (s * s);
  for_each(center, &bound, [&](std::span<const std::int64_t>, double dist_sq) {
    acc.add(std::exp(-scale * dist_sq));
    ++terms;
  });
  return {acc.sum, terms};
}

std::vector<std::int64_t> Enumerator::babai(std::span<const double> target) const {
  Frame f = project(target);
  std::vector<std::int64_t> x(rank(), 0);
  for (std::size_t level = rank(); level-- > 0;) {
    double c = f.tau[level];
    for (std::size_t i = level + 1; i < rank(); ++i) c -= static_cast<double>(x[i]) * gso_.mu(i, level);
    x[level] = static_cast<std::int64_t>(std::round(c));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Public operations

EnumerationResult points_in_ball(const LatticeBasis& basis, const BallQuery& query) {
  if (!(query.radius > 0)) throw InvalidInput("radius must be positive");
  std::vector<double> center = center_or_origin(query.center, basis.ambient_dim());
  Enumerator en(basis);
  const double predicted = en.predicted_count(query.radius);
  if (predicted > query.budget) {
    throw BudgetExceeded("predicted " + std::to_string(predicted) + " points exceeds the budget");
  }
  EnumerationResult result;
  double bound = query.radius * query.radius;
  const double r2 = bound;
  std::vector<std::vector<std::int64_t>> raw;
  std::vector<double> dists;
  en.for_each(center, &bound, [&](std::span<const std::int64_t> x, double dist_sq) {
    if (!result.complete) return;
    if (raw.size() >= query.max_points) {
      result.complete = false;
      return;
    }
    raw.emplace_back(x.begin(), x.end());
    dists.push_back(dist_sq);
  });
  result.points.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    LatticePoint p;
    p.coefficients = en.input_coefficients(raw[k]);
    p.dist_sq = dists[k];
    if (basis.is_exact() && dists[k] > r2 * (1 - kEnumSlack)) {
      // boundary band: decide membership exactly
      Rational exact = exact_dist_sq(basis, p.coefficients, center);
      if (exact > rational_from_double(r2)) continue;
      p.dist_sq = exact.get_d();
    }
    p.coordinates = en.coordinates(raw[k]);
    result.points.push_back(std::move(p));
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const LatticePoint& a, const LatticePoint& b) { return lex_less(a.coefficients, b.coefficients); });
  return result;
}

std::uint64_t count_points_in_ball(const LatticeBasis& basis, double radius, std::span<const double> center) {
  if (!(radius >= 0)) throw InvalidInput("radius must be non-negative");
  Enumerator en(basis);
  return en.count(center, radius * radius);
}

namespace {

// Collects near-minimizers, then applies the deterministic tie-break.
LatticeVector pick_minimizer(const LatticeBasis& basis, const Enumerator& en,
                             const std::vector<std::vector<std::int64_t>>& candidates,
                             const std::vector<double>& dists, double best,
                             std::span<const double> center, bool symmetric) {
  std::vector<std::vector<std::int64_t>> ties;
  std::vector<std::vector<std::int64_t>> reduced_ties;
  if (basis.is_exact()) {
    // Exact comparison among float near-ties.
    Rational best_exact;
    bool have = false;
    std::vector<Rational> exact(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (dists[k] > best * (1 + 1e-8) + 1e-300) continue;
      exact[k] = exact_dist_sq(basis, en.input_coefficients(candidates[k]), center);
      if (!have || exact[k] < best_exact) {
        best_exact = exact[k];
        have = true;
      }
    }
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (dists[k] > best * (1 + 1e-8) + 1e-300) continue;
      if (exact[k] == best_exact) {
        ties.push_back(en.input_coefficients(candidates[k]));
        reduced_ties.push_back(candidates[k]);
      }
    }
  } else {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (dists[k] <= best * (1 + 1e-9) + 1e-300) {
        ties.push_back(en.input_coefficients(candidates[k]));
        reduced_ties.push_back(candidates[k]);
      }
    }
  }
  if (symmetric) {
    for (std::size_t k = 0; k < ties.size(); ++k) {
      auto nz = std::find_if(ties[k].begin(), ties[k].end(), [](std::int64_t v) { return v != 0; });
      if (nz != ties[k].end() && *nz < 0) {
        for (auto& v : ties[k]) v = -v;
        for (auto& v : reduced_ties[k]) v = -v;
      }
    }
  }
  std::size_t pick = 0;
  for (std::size_t k = 1; k < ties.size(); ++k)
    if (lex_less(ties[k], ties[pick])) pick = k;
  LatticeVector out;
  out.coefficients = ties[pick];
  out.coordinates = en.coordinates(reduced_ties[pick]);
  double d2 = 0;
  for (std::size_t j = 0; j < out.coordinates.size(); ++j) {
    double diff = out.coordinates[j] - (center.empty() ? 0.0 : center[j]);
    d2 += diff * diff;
  }
  out.norm = std::sqrt(d2);
  return out;
}

}  // namespace

LatticeVector shortest_vector(const LatticeBasis& basis) {
  Enumerator en(basis);
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < en.rank(); ++i) {
    bound = std::min(bound, dot<double>(en.reduced().rows().row(i), en.reduced().rows().row(i)));
  }
  double best = bound;
  std::vector<std::vector<std::int64_t>> cands;
  std::vector<double> dists;
  en.for_each({}, &bound, [&](std::span<const std::int64_t> x, double d2) {
    if (std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; })) return;
    if (d2 <= best * (1 + 1e-8)) {
      cands.emplace_back(x.begin(), x.end());
      dists.push_back(d2);
    }
    if (d2 < best) {
      best = d2;
      bound = d2;  // keep slack band so ties are still visited
    }
  });
  return pick_minimizer(basis, en, cands, dists, best, {}, true);
}

LatticeVector closest_vector(const LatticeBasis& basis, std::span<const double> target) {
  if (target.size() != basis.ambient_dim()) throw InvalidInput("target dimension mismatch");
  Enumerator en(basis);
  std::vector<std::int64_t> start = en.babai(target);
  std::vector<double> y = en.coordinates(start);
  double bound = 0;
  for (std::size_t j = 0; j < y.size(); ++j) bound += (y[j] - target[j]) * (y[j] - target[j]);
  double best = bound;
  std::vector<std::vector<std::int64_t>> cands;
  std::vector<double> dists;
  en.for_each(target, &bound, [&](std::span<const std::int64_t> x, double d2) {
    if (d2 <= best * (1 + 1e-8) + 1e-300) {
      cands.emplace_back(x.begin(), x.end());
      dists.push_back(d2);
    }
    if (d2 < best) {
      best = d2;
      bound = d2;
    }
  });
  if (cands.empty()) {
    cands.push_back(start);
    dists.push_back(best);
  }
  return pick_minimizer(basis, en, cands, dists, best, target, false);
}

}  // namespace latkit
