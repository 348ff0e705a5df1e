#include "latkit/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "latkit/enumerate.hpp"
#include "latkit/errors.hpp"

namespace latkit {

namespace {

constexpr double kPi = std::numbers::pi;
// Relative rounding slack on every floating sum (exp, distances, Kahan).
constexpr double kRound = 1e-13;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Sum of exp(-x) over x >= 0, with x below ~700 summed directly and the rest
// kept as a log-sum-exp so nothing underflows silently.
struct ExpSum {
  double sum = 0, comp = 0;
  double log_small = kNegInf;
  void add(double x) {
    if (x < 700) {
      double y = std::exp(-x) - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    } else {
      log_small = log_add(log_small, -x);
    }
  }
  double log_value() const { return log_add(sum > 0 ? std::log(sum) : kNegInf, log_small); }
};

double half_step(int m) { return m / (2.0 * std::sqrt(2 * kPi)); }

int radius_steps(std::size_t n, double log_q) {
  int m = 3;
  while (banaszczyk_log_factor(n, half_step(m)) > log_q) ++m;
  return m;
}

// Components of the Gram matrix's nonzero pattern.
std::vector<std::vector<std::size_t>> orthogonal_blocks(const LatticeBasis& b) {
  const std::size_t d = b.rank();
  std::vector<std::size_t> comp(d, d);
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start < d; ++start) {
    if (comp[start] != d) continue;
    std::vector<std::size_t> members{start}, stack{start};
    comp[start] = blocks.size();
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < d; ++j) {
        if (comp[j] != d) continue;
        const bool linked = b.is_exact() ? b.exact_gram()(i, j) != 0 : b.gram()(i, j) != 0.0;
        if (linked) {
          comp[j] = blocks.size();
          members.push_back(j);
          stack.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
    blocks.push_back(std::move(members));
  }
  return blocks;
}

LatticeBasis rows_subset(const LatticeBasis& b, const std::vector<std::size_t>& rows) {
  if (b.is_exact()) {
    RatMatrix m(rows.size(), b.ambient_dim());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < b.ambient_dim(); ++j) m(i, j) = b.exact_rows()(rows[i], j);
    return LatticeBasis(std::move(m));
  }
  RealMatrix m(rows.size(), b.ambient_dim());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < b.ambient_dim(); ++j) m(i, j) = b.rows()(rows[i], j);
  return LatticeBasis(std::move(m));
}

void finish_from_excess(MassInterval& m) {
  m.lower = 1 + (m.log_lower_excess == kNegInf ? 0.0 : std::exp(m.log_lower_excess));
  m.upper = 1 + (m.log_upper_excess == kNegInf ? 0.0 : std::exp(m.log_upper_excess));
}

// Direct summation over a ball of multiplier m (radius half_step(m) sqrt(n) s).
MassInterval sum_direct(const Enumerator& en, double s, int m) {
  const std::size_t n = en.rank();
  const double r = half_step(m);
  const double radius = r * std::sqrt(static_cast<double>(n)) * s;
  const double log_q = banaszczyk_log_factor(n, r);
  const double q = std::exp(log_q);
  ExpSum acc;
  std::uint64_t terms = 0;
  double bound = radius * radius;
  const double scale = kPi / (s * s);
  en.for_each({}, &bound, [&](std::span<const std::int64_t> x, double d2) {
    ++terms;
    if (d2 == 0 && std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; })) return;
    acc.add(scale * d2);
  });
  MassInterval out;
  out.s = s;
  out.truncation_radius = radius;
  out.terms = terms;
  const double log_e = acc.log_value();
  out.log_lower_excess = log_e == kNegInf ? kNegInf : log_e + std::log1p(-kRound);
  // rho <= (1 + E) / (1 - q)  =>  rho - 1 <= (E + q) / (1 - q)
  out.log_upper_excess =
      log_add(log_e == kNegInf ? kNegInf : log_e + std::log1p(kRound), log_q) - std::log1p(-q);
  finish_from_excess(out);
  return out;
}

MassInterval single_block(const LatticeBasis& basis, double s, double eps, const MassOptions& opts) {
  const std::size_t n = basis.rank();
  if (n == 0) return MassInterval{};
  double log_q = std::log(0.5 * eps / (1 + 0.5 * eps));
  if (opts.log_abs_width) log_q = std::min(log_q, *opts.log_abs_width - std::log(4.0));
  const int m = radius_steps(n, log_q);
  const double root_n = std::sqrt(static_cast<double>(n));

  Enumerator primal(basis);
  const double p_count = primal.predicted_count(half_step(m) * root_n * s);
  std::optional<Enumerator> dual;
  double d_count = std::numeric_limits<double>::infinity();
  if (opts.allow_dual && basis.full_rank()) {
    dual.emplace(dual_basis(basis));
    d_count = dual->predicted_count(half_step(m) * root_n / s);
  }
  const bool use_dual = d_count < 0.5 * p_count;
  const Enumerator& en = use_dual ? *dual : primal;
  const double s_eff = use_dual ? 1 / s : s;

  auto evaluate = [&](int steps) {
    MassInterval inner = sum_direct(en, s_eff, steps);
    if (!use_dual) return inner;
    const double log_c = static_cast<double>(n) * std::log(s) - basis.log_det();
    MassInterval out = inner;
    out.s = s;
    out.lower = std::exp(log_c + std::log(inner.lower) + std::log1p(-kRound));
    out.upper = std::exp(log_c + std::log(inner.upper) + std::log1p(kRound));
    out.log_lower_excess = out.lower > 1 ? std::log(out.lower - 1) : kNegInf;
    out.log_upper_excess = out.upper > 1 ? std::log(out.upper - 1) : kNegInf;
    return out;
  };

  const double count = use_dual ? d_count : p_count;
  if (count > opts.budget) {
    int best = 0;
    for (int k = 3; k < m; ++k) {
      const double c = en.predicted_count(half_step(k) * root_n * s_eff);
      if (c <= opts.budget) best = k;
    }
    if (best == 0) throw BudgetExceeded("Gaussian mass: even the smallest certified radius exceeds the budget");
    MassInterval partial = evaluate(best);
    throw BudgetExceeded("Gaussian mass: requested precision exceeds the point budget",
                         std::make_pair(partial.lower, partial.upper));
  }
  return evaluate(m);
}

}  // namespace

double banaszczyk_log_factor(std::size_t n, double r) {
  return static_cast<double>(n) * (0.5 * std::log(2 * kPi * std::numbers::e * r * r) - kPi * r * r);
}

double banaszczyk_radius(std::size_t n, double log_q) { return half_step(radius_steps(n, log_q)); }

MassInterval gaussian_mass(const LatticeBasis& basis, double s, double eps, const MassOptions& opts) {
  if (!(s > 0) || !std::isfinite(s)) throw InvalidInput("s must be positive");
  if (!(eps > 0)) throw InvalidInput("eps must be positive");
  std::vector<std::vector<std::size_t>> blocks;
  if (opts.split_blocks) blocks = orthogonal_blocks(basis);
  if (blocks.size() <= 1) return single_block(basis, s, eps, opts);

  const double k = static_cast<double>(blocks.size());
  MassOptions sub = opts;
  if (opts.log_abs_width) sub.log_abs_width = *opts.log_abs_width - std::log(k);
  MassInterval out;
  out.s = s;
  double log_lo_prod = 0, log_up_prod = 0;
  double lse_lo = kNegInf, lse_up = kNegInf;
  for (const auto& block : blocks) {
    MassInterval part = single_block(rows_subset(basis, block), s, eps / (1.05 * k), sub);
    out.terms += part.terms;
    out.truncation_radius = std::max(out.truncation_radius, part.truncation_radius);
    log_lo_prod += std::log(part.lower);
    log_up_prod += std::log(part.upper);
    lse_lo = log_add(lse_lo, part.log_lower_excess);
    lse_up = log_add(lse_up, part.log_upper_excess);
  }
  // prod(1 + e_i) - 1 lies in [sum e_i, (sum e_i) prod(1 + e_i)]; when the
  // product is far from 1 its expm1 is the sharper enclosure.
  const double guard = 8 * k * std::numeric_limits<double>::epsilon();
  out.log_lower_excess = lse_lo;
  out.log_upper_excess = lse_up == kNegInf ? kNegInf : lse_up + log_up_prod;
  if (log_lo_prod > 1e-8) {
    out.log_lower_excess = std::max(lse_lo, std::log(std::expm1(log_lo_prod) * (1 - guard)));
  }
  if (log_up_prod > 1e-8) {
    out.log_upper_excess = std::min(out.log_upper_excess, std::log(std::expm1(log_up_prod) * (1 + guard)));
  }
  finish_from_excess(out);
  return out;
}

MassInterval shifted_mass(const LatticeBasis& basis, std::span<const double> u, double s, double eps,
                          const MassOptions& opts) {
  if (!(s > 0)) throw InvalidInput("s must be positive");
  if (!basis.full_rank()) throw InvalidInput("shifted mass needs a full-rank lattice");
  if (u.size() != basis.ambient_dim()) throw InvalidInput("shift dimension mismatch");
  const std::size_t n = basis.rank();
  const double root_n = std::sqrt(static_cast<double>(n));
  const double rho_up = gaussian_mass(basis, s, 1e-6, opts).upper;
  Enumerator en(basis);
  const double scale = kPi / (s * s);

  double log_q = std::log(0.5 * eps) - std::log(rho_up);
  for (int round = 0; round < 8; ++round) {
    const int m = radius_steps(n, log_q);
    const double r = half_step(m);
    const double radius = r * root_n * s;
    if (en.predicted_count(radius) > opts.budget) {
      throw BudgetExceeded("shifted mass: requested precision exceeds the point budget");
    }
    ExpSum acc;
    std::uint64_t terms = 0;
    double bound = radius * radius;
    en.for_each(u, &bound, [&](std::span<const std::int64_t>, double d2) {
      ++terms;
      acc.add(scale * d2);
    });
    const double log_s = acc.log_value();
    const double log_tail = banaszczyk_log_factor(n, r) + std::log(rho_up);
    if (log_s != kNegInf && log_tail <= std::log(0.5 * eps) + log_s) {
      MassInterval out;
      out.s = s;
      out.truncation_radius = radius;
      out.terms = terms;
      out.lower = std::exp(log_s) * (1 - kRound);
      out.upper = std::exp(log_s) * (1 + kRound) + std::exp(log_tail);
      out.log_lower_excess = out.lower > 1 ? std::log(out.lower - 1) : kNegInf;
      out.log_upper_excess = out.upper > 1 ? std::log(out.upper - 1) : kNegInf;
      return out;
    }
    log_q = std::min(log_q - 2, (log_s == kNegInf ? log_q - 20 : std::log(0.25 * eps) + log_s - std::log(rho_up)));
  }
  throw BudgetExceeded("shifted mass: could not reach the requested precision");
}

PsfResidual psf_residual(const LatticeBasis& basis, double s, double eps) {
  if (!basis.full_rank()) throw InvalidInput("Poisson summation check needs a full-rank lattice");
  MassOptions direct;
  direct.allow_dual = false;
  PsfResidual out;
  out.primal = gaussian_mass(basis, s, eps, direct);
  out.dual = gaussian_mass(dual_basis(basis), 1 / s, eps, direct);
  const double n = static_cast<double>(basis.rank());
  const double c = std::exp(n * std::log(s) - basis.log_det());
  const double rhs = c * out.dual.mid();
  out.residual = std::abs(out.primal.mid() - rhs) / out.primal.mid();
  out.tolerance = (out.primal.width() + c * out.dual.width()) / out.primal.lower + 16 * n * 1e-16;
  return out;
}

SmoothingResult smoothing_parameter(const LatticeBasis& basis, double target, double tol) {
  if (!(target > 1)) throw InvalidInput("target mass must exceed 1");
  if (!(tol > 0)) throw InvalidInput("tolerance must be positive");
  auto mass = [&](double t, double eps) { return gaussian_mass(basis, 1 / t, eps); };
  SmoothingResult out;
  out.target = target;
  double lo = 1, hi = 1;
  if (mass(1, 1e-12).upper <= target) {
    lo = 0.5;
    while (mass(lo, 1e-12).lower < target) {
      hi = lo;
      lo *= 0.5;
    }
  } else {
    hi = 2;
    while (mass(hi, 1e-12).upper > target) {
      lo = hi;
      hi *= 2;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    MassInterval m = mass(mid, 1e-12);
    if (m.upper <= target) {
      hi = mid;
    } else if (m.lower >= target) {
      lo = mid;
    } else {
      m = mass(mid, 1e-15);
      if (m.upper <= target) {
        hi = mid;
      } else if (m.lower >= target) {
        lo = mid;
      } else {
        break;  // the mass equals the target to working precision
      }
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.eta_star = 0.5 * (lo + hi);
  return out;
}

RealInterval mass_laplacian(const LatticeBasis& basis, double s, double eps, double budget) {
  if (!basis.full_rank()) throw InvalidInput("Laplacian needs a full-rank lattice");
  if (!(s > 0)) throw InvalidInput("s must be positive");
  const std::size_t n = basis.rank();
  const double nd = static_cast<double>(n);
  if (n == 1) return {0, 0};
  const double a = kPi / (s * s);
  const double pre = a * (nd - 1) / nd;
  // |term(u)| <= pre * exp(-a u / 2) * phi(u) with phi decreasing past u_star.
  const double qa = 0.5 * a * a, qb = a * (nd + 2) / 4 - 2 * a, qc = -(nd + 2) / 2;
  const double u_star = (-qb + std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
  auto phi = [&](double u) { return std::exp(-0.5 * a * u) * (a * u * u + (nd + 2) * u / 2); };
  const double s2 = s * std::sqrt(2.0);
  const double rho2_up = gaussian_mass(basis, s2, 1e-6).upper;

  Enumerator en(basis);
  double log_q = std::log(eps);
  for (int round = 0; round < 40; ++round) {
    int m = radius_steps(n, log_q);
    while (std::pow(half_step(m) * std::sqrt(nd) * s2, 2) < u_star) ++m;
    const double r = half_step(m);
    const double radius = r * std::sqrt(nd) * s2;
    if (en.predicted_count(radius) > budget) throw BudgetExceeded("Laplacian: point budget exceeded");
    double sum = 0, comp = 0, abs_sum = 0;
    double bound = radius * radius;
    en.for_each({}, &bound, [&](std::span<const std::int64_t>, double u) {
      const double term = pre * std::exp(-a * u) * u * (a * u - (nd + 2) / 2);
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      abs_sum += std::abs(term);
    });
    const double tail = pre * phi(radius * radius) * std::exp(banaszczyk_log_factor(n, r)) * rho2_up;
    const double slack = tail + kRound * abs_sum;
    if (tail <= 0.5 * eps * abs_sum || (abs_sum == 0 && tail < 1e-300)) {
      return {sum - slack, sum + slack};
    }
    log_q = 1.5 * log_q - 4;
  }
  throw BudgetExceeded("Laplacian: could not reach the requested precision");
}

}  // namespace latkit
