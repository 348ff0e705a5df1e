#include "latkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "latkit/enumerate.hpp"
#include "latkit/errors.hpp"
#include "latkit/gaussian.hpp"
#include "latkit/random.hpp"
#include "latkit/voronoi.hpp"

namespace latkit {

namespace {

constexpr double kPi = std::numbers::pi;

Check make_check(std::string name, std::string anchor, CheckMethod method = CheckMethod::certified) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.method = method;
  return c;
}

void set_lhs(Check& c, double lo, double hi) {
  c.lhs_lower = lo;
  c.lhs_upper = hi;
}
void set_rhs(Check& c, double lo, double hi) {
  c.rhs_lower = lo;
  c.rhs_upper = hi;
}

// lhs <= rhs (or < when strict) for every value inside both enclosures.
void decide(Check& c, bool strict = false) {
  const bool holds = strict ? c.lhs_upper < c.rhs_lower : c.lhs_upper <= c.rhs_lower;
  const bool refuted = strict ? c.lhs_lower >= c.rhs_upper : c.lhs_lower > c.rhs_upper;
  c.relation = strict ? "<" : "<=";
  c.status = holds ? CheckStatus::pass : refuted ? CheckStatus::fail : CheckStatus::inconclusive;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double lambda1(const LatticeBasis& basis) { return shortest_vector(basis).norm; }

void add_param(VerificationReport& r, const std::string& key, double v) { r.parameters.emplace_back(key, v); }

LatticeBasis prepared(const LatticeBasis& basis, const VerifyOptions& opts) {
  return opts.normalize ? normalized(basis) : basis;
}

// The premise has already been established for these.

VerificationReport rm_impl(const LatticeBasis& basis, const CanonicalPlot& plot, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.lattice_name = basis.name();
  const std::size_t n = basis.rank();
  const double t = rm_parameter(n);
  add_param(rep, "t", t);

  // resolve the excess rho - 1 well below double resolution as well
  MassOptions mo;
  mo.log_abs_width = -400;
  const MassInterval m = gaussian_mass(basis, 1 / t, opts.eps, mo);
  Check c = make_check("reverse_minkowski", "Reverse Minkowski theorem: rho_{1/t}(L) <= 3/2, t = 10(log n + 2)");
  set_lhs(c, m.lower, m.upper);
  set_rhs(c, 1.5, 1.5);
  decide(c);
  rep.checks.push_back(c);
  add_param(rep, "log_excess_upper", m.log_upper_excess);

  const SmoothingResult eta = smoothing_parameter(basis, 1.5, 1e-4);
  const CertifiedValue ed = eta_det(plot);
  add_param(rep, "eta_star", eta.eta_star);
  add_param(rep, "eta_det", ed.value);

  Check lo = make_check("eta_sandwich_lower", "smoothing sandwich: (2/3) eta_det(L) <= eta*(L)");
  set_lhs(lo, 2.0 / 3.0 * ed.value, 2.0 / 3.0 * ed.value);
  set_rhs(lo, eta.lo, eta.hi);
  decide(lo);
  rep.checks.push_back(lo);

  Check hi = make_check("eta_sandwich_upper", "smoothing sandwich: eta*(L) <= 10(log n + 2) eta_det(L)");
  set_lhs(hi, eta.lo, eta.hi);
  set_rhs(hi, t * ed.value, t * ed.value);
  decide(hi);
  rep.checks.push_back(hi);
  return rep;
}

VerificationReport params_impl(const LatticeBasis& basis, double s, const VerifyOptions& opts) {
  if (!(s > 0)) throw InvalidInput("s must be positive");
  VerificationReport rep;
  rep.lattice_name = basis.name();
  const std::size_t n = basis.rank();
  const double nn = static_cast<double>(n);
  const double t = rm_parameter(n);
  add_param(rep, "t", t);
  add_param(rep, "s", s);
  const std::string tag = "[s=" + fmt(s) + "]";

  if (s <= 1 / t) {
    // Compared through log(rho - 1): the excess is far below double resolution.
    const double l1 = lambda1(basis);
    const double gap = 1 / (s * s) - t * t;
    const double basic = -kPi * gap - std::log(2.0);
    const double strong = -kPi * l1 * l1 * gap - std::log(2.0);
    MassOptions mo;
    mo.log_abs_width = std::min(basic, strong) - 2;
    const MassInterval m = gaussian_mass(basis, s, opts.eps, mo);
    add_param(rep, "lambda1", l1);

    Check c = make_check(std::string("all_parameters_small_s") + tag,
                         "reverse Minkowski at all parameters, s <= 1/t: rho_s(L) <= 1 + exp(-pi(1/s^2 - t^2))/2");
    c.scale = "log";
    set_lhs(c, m.log_lower_excess, m.log_upper_excess);
    set_rhs(c, basic, basic);
    decide(c);
    rep.checks.push_back(c);

    Check d = make_check(std::string("all_parameters_small_s_lambda1") + tag,
                         "reverse Minkowski at all parameters, strengthened: rho_s(L) <= 1 + "
                         "exp(-pi lambda1^2 (1/s^2 - t^2))/2");
    d.scale = "log";
    set_lhs(d, m.log_lower_excess, m.log_upper_excess);
    set_rhs(d, strong, strong);
    decide(d);
    rep.checks.push_back(d);
  } else if (s >= t) {
    const MassInterval m = gaussian_mass(basis, s, opts.eps);
    Check c = make_check(std::string("all_parameters_large_s") + tag, "reverse Minkowski at all parameters, s >= t: rho_s(L) <= 2 s^n");
    const double rhs = 2 * std::pow(s, nn);
    set_lhs(c, m.lower, m.upper);
    set_rhs(c, rhs, rhs);
    decide(c);
    rep.checks.push_back(c);
  } else {
    const MassInterval m = gaussian_mass(basis, s, opts.eps);
    Check c = make_check(std::string("all_parameters_intermediate") + tag,
                         "intermediate parameters: rho_s(L) <= 4 (e^8 s t)^{n/2} for 1/t < s < t");
    c.scale = "log";
    const double rhs = std::log(4.0) + nn / 2 * (8 + std::log(s * t));
    set_lhs(c, std::log(m.lower), std::log(m.upper));
    set_rhs(c, rhs, rhs);
    decide(c);
    c.note = "constant C = e^8";
    add_param(rep, "C_mass", std::exp(8.0));
    rep.checks.push_back(c);
  }
  return rep;
}

VerificationReport counting_impl(const LatticeBasis& basis, double r, std::span<const double> u) {
  if (!(r > 0)) throw InvalidInput("radius must be positive");
  if (!u.empty() && u.size() != basis.ambient_dim()) throw InvalidInput("center dimension mismatch");
  VerificationReport rep;
  rep.lattice_name = basis.name();
  const std::size_t n = basis.rank();
  const double nn = static_cast<double>(n);
  const double t = rm_parameter(n);
  add_param(rep, "t", t);
  add_param(rep, "r", r);
  const std::string tag = "[r=" + fmt(r) + "]";

  if (Enumerator(basis).predicted_count(r) > BallQuery{}.budget) throw BudgetExceeded("ball too large to count");
  const std::uint64_t count = count_points_in_ball(basis, r, u);
  const double lc = count > 0 ? std::log(static_cast<double>(count)) : -INFINITY;
  add_param(rep, "count", static_cast<double>(count));

  const double pivot = std::sqrt(nn / (2 * kPi));
  auto bound_check = [&](const std::string& name, const char* anchor, double log_rhs, bool in_hyp) {
    Check c = make_check(name + tag, anchor);
    c.scale = "log";
    set_lhs(c, lc, lc);
    set_rhs(c, log_rhs, log_rhs);
    decide(c);
    if (!in_hyp) {
      c.conditional = true;
      c.note = "radius outside the hypothesis of this item; reported only";
    }
    rep.checks.push_back(c);
  };

  if (r >= 1)
    bound_check("counting_small_r", "point counting, r >= 1: |L cap (rB + u)| <= 3 exp(pi t^2 r^2)/2",
                std::log(1.5) + kPi * t * t * r * r, true);
  {
    const bool in_hyp = pivot / t <= r && r <= pivot * t;
    // C = e^9 sqrt(2 pi), from the intermediate-parameter mass bound at s = sqrt(n/(2 pi))/r
    const double log_c = 9 + 0.5 * std::log(2 * kPi);
    add_param(rep, "C_count", std::exp(log_c));
    if (in_hyp)
      bound_check("counting_intermediate",
                  "point counting, intermediate r: |L cap (rB + u)| <= 4 (C t r / sqrt n)^{n/2}",
                  std::log(4.0) + nn / 2 * (log_c + std::log(t * r / std::sqrt(nn))), true);
  }
  {
    const bool in_hyp = r >= pivot * t;
    bound_check("counting_large_r", "point counting, r >= sqrt(n/(2 pi)) t: |L cap (rB + u)| <= 2 (2 pi e r^2/n)^{n/2}",
                std::log(2.0) + nn / 2 * std::log(2 * kPi * std::numbers::e * r * r / nn), in_hyp);
  }
  return rep;
}

VerificationReport extreme_impl(const LatticeBasis& basis, double s, const VerifyOptions& opts) {
  const std::size_t n = basis.rank();
  const double nn = static_cast<double>(n);
  const double lo = std::sqrt(2 * kPi / (nn + 2)), hi = std::sqrt((nn + 2) / (2 * kPi));
  // a tiny relative slack so the boundary values themselves qualify
  if (!(s > 0) || (s > lo * (1 + 1e-12) && s < hi * (1 - 1e-12)))
    throw NotApplicable("s = " + fmt(s) + " lies strictly between the extreme ranges");
  VerificationReport rep;
  rep.lattice_name = basis.name();
  add_param(rep, "s", s);
  const MassInterval ml = gaussian_mass(basis, s, opts.eps);
  const MassInterval mz = gaussian_mass(LatticeBasis::identity(n), s, opts.eps);
  Check c = make_check("extreme_parameters[s=" + fmt(s) + "]", "extreme parameters: rho_s(L) <= rho_s(Z^n)");
  set_lhs(c, ml.lower, ml.upper);
  set_rhs(c, mz.lower, mz.upper);
  decide(c);
  if (c.status == CheckStatus::inconclusive) {
    // overlapping enclosures: equal to working precision (e.g. L = Z^n up to rotation)
    c.status = CheckStatus::pass;
    c.note = "equal within certified interval widths";
  }
  rep.checks.push_back(c);
  return rep;
}

VerificationReport covering_impl(const LatticeBasis& basis, std::optional<double> l_n, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.lattice_name = basis.name();
  rep.seed = opts.seed;
  rep.samples = opts.samples;
  const std::size_t n = basis.rank();
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);

  const CoveringRadius mu = covering_radius(basis, opts.seed + 1);
  const CertifiedValue md = mu_det(basis, opts.search);
  add_param(rep, "mu_lower", mu.lower);
  add_param(rep, "mu_upper", mu.upper);
  add_param(rep, "mu_det", md.value);
  auto finish = [&](Check& c) {
    decide(c);
    if (!md.certified && c.status == CheckStatus::pass) c.status = CheckStatus::inconclusive;
    if (!mu.exact) c.note = "covering radius bracketed";
    rep.checks.push_back(c);
  };

  {
    Check c = make_check("covering_lower", "covering-radius approximation: mu_det(L)/sqrt(2 pi e) <= mu(L)");
    const double v = md.value / std::sqrt(2 * kPi * std::numbers::e);
    set_lhs(c, v, v);
    set_rhs(c, mu.lower, mu.upper);
    finish(c);
  }
  {
    Check c = make_check("covering_upper", "covering-radius approximation: mu(L) <= 10 (log n + 10)^{3/2} mu_det(L)");
    const double v = 10 * std::pow(ln + 10, 1.5) * md.value;
    set_lhs(c, mu.lower, mu.upper);
    set_rhs(c, v, v);
    finish(c);
  }
  {
    const CanonicalPlot plot = canonical_plot(basis, opts.search);
    const StabilityCertificate st = is_stable(basis, plot);
    if (st.stable && st.search_certified) {
      Check c = make_check("covering_stable", "covering radius of stable lattices: mu(L) <= 4 sqrt(n) (log n + 10)");
      const double v = 4 * std::sqrt(nn) * (ln + 10);
      set_lhs(c, mu.lower, mu.upper);
      set_rhs(c, v, v);
      decide(c);
      rep.checks.push_back(c);
    }
  }
  {
    // smallest certified t with rho_{1/t}(L*) <= 3/2
    const SmoothingResult eta = smoothing_parameter(dual_basis(basis), 1.5, 1e-6);
    Check c = make_check("covering_smoothing", "covering radius from dual smoothing: mu(L) < (sqrt(n/(2 pi)) + 1) t");
    const double v = (std::sqrt(nn / (2 * kPi)) + 1) * eta.hi;
    add_param(rep, "dual_eta_star_upper", eta.hi);
    set_lhs(c, mu.lower, mu.upper);
    set_rhs(c, v, v);
    decide(c, true);
    rep.checks.push_back(c);
  }
  {
    const MonteCarloEstimate mb = second_moment(basis, opts.samples, opts.seed);
    add_param(rep, "mu_bar", mb.mean);
    add_param(rep, "mu_bar_std_error", mb.std_error);
    Check a = make_check("second_moment_lower", "second moment vs covering radius: mu_bar(L) <= mu(L)",
                         CheckMethod::monte_carlo);
    set_lhs(a, mb.mean - 3 * mb.std_error, mb.mean + 3 * mb.std_error);
    set_rhs(a, mu.lower, mu.upper);
    a.status = a.lhs_lower <= a.rhs_upper ? CheckStatus::pass : CheckStatus::fail;
    a.note = "within 3 standard errors";
    rep.checks.push_back(a);

    Check b = make_check("second_moment_upper", "second moment vs covering radius: mu(L) <= sqrt(3) mu_bar(L)",
                         CheckMethod::monte_carlo);
    const double r3 = std::sqrt(3.0);
    set_lhs(b, mu.lower, mu.upper);
    set_rhs(b, r3 * (mb.mean - 3 * mb.std_error), r3 * (mb.mean + 3 * mb.std_error));
    b.status = b.lhs_lower <= b.rhs_upper ? CheckStatus::pass : CheckStatus::fail;
    b.note = "within 3 standard errors";
    rep.checks.push_back(b);
  }
  if (l_n) {
    Check c = make_check("covering_slicing",
                         "covering radius via slicing: mu(L) <= 5 sqrt(log n + 1) L_n mu_det(L)");
    const double v = 5 * std::sqrt(ln + 1) * *l_n * md.value;
    set_lhs(c, mu.lower, mu.upper);
    set_rhs(c, v, v);
    decide(c);
    c.conditional = true;
    c.note = "conditional on the supplied slicing constant L_n = " + fmt(*l_n);
    add_param(rep, "L_n", *l_n);
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

const char* to_string(CheckMethod m) {
  switch (m) {
    case CheckMethod::certified:
      return "certified";
    case CheckMethod::monte_carlo:
      return "monte-carlo";
    default:
      return "closed-form";
  }
}

bool VerificationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return !c.conditional && c.status != CheckStatus::pass; });
}

bool VerificationReport::inconclusive() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const Check& c) { return !c.conditional && c.status == CheckStatus::inconclusive; });
}

void VerificationReport::append(const VerificationReport& other) {
  if (lattice_name.empty()) lattice_name = other.lattice_name;
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  for (const auto& p : other.parameters) {
    auto it = std::find_if(parameters.begin(), parameters.end(), [&](const auto& q) { return q.first == p.first; });
    if (it == parameters.end()) parameters.push_back(p);
  }
}

nlohmann::json report_to_json(const VerificationReport& report) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"anchor", c.anchor},
                      {"lhs", {num(c.lhs_lower), num(c.lhs_upper)}},
                      {"relation", c.relation},
                      {"rhs", {num(c.rhs_lower), num(c.rhs_upper)}},
                      {"scale", c.scale},
                      {"method", to_string(c.method)},
                      {"status", to_string(c.status)},
                      {"pass", c.status == CheckStatus::pass},
                      {"conditional", c.conditional},
                      {"note", c.note}});
  }
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : report.parameters) params[k] = num(v);
  return {{"lattice_name", report.lattice_name},
          {"seed", report.seed},
          {"samples", report.samples},
          {"passed", report.passed()},
          {"inconclusive", report.inconclusive()},
          {"parameters", params},
          {"checks", checks}};
}

double rm_parameter(std::size_t n) { return 10 * (std::log(static_cast<double>(n)) + 2); }

LatticeBasis normalized(const LatticeBasis& basis) {
  const std::size_t n = basis.rank();
  if (n == 0) return basis;
  if (basis.is_exact()) {
    // factor c with c^{2n} = 1 / det^2
    const Rational inv = 1 / basis.exact_gram_det();
    Integer num, den;
    const unsigned long k = 2 * n;
    if (mpz_root(num.get_mpz_t(), inv.get_num_mpz_t(), k) != 0 &&
        mpz_root(den.get_mpz_t(), inv.get_den_mpz_t(), k) != 0) {
      LatticeBasis out = scaled(basis, Rational(num, den));
      out.set_name(basis.name());
      return out;
    }
  }
  LatticeBasis out = scaled(basis, std::exp(-basis.log_det() / static_cast<double>(n)));
  out.set_name(basis.name());
  return out;
}

CanonicalPlot check_premise(const LatticeBasis& basis, const SearchOptions& search) {
  CanonicalPlot plot = canonical_plot(basis, search);
  if (!all_sublattices_at_least_one(basis, plot)) {
    std::size_t worst = 0;
    for (std::size_t k = 1; k < plot.min_log_det.size(); ++k)
      if (worst == 0 || plot.min_log_det[k] < plot.min_log_det[worst]) worst = k;
    const SublatticeWitness& w = plot.witness[worst];
    throw PremiseNotMet("sublattice of rank " + std::to_string(worst) + " has determinant " + fmt(w.det()) + " < 1",
                        w.det(), static_cast<int>(worst));
  }
  if (!plot.all_certified()) throw Inconclusive("densest-sublattice search did not finish within budget");
  return plot;
}

VerificationReport verify_reverse_minkowski(const LatticeBasis& basis0, const VerifyOptions& opts) {
  const LatticeBasis basis = prepared(basis0, opts);
  const CanonicalPlot plot = check_premise(basis, opts.search);
  return rm_impl(basis, plot, opts);
}

VerificationReport verify_all_parameters(const LatticeBasis& basis0, double s, const VerifyOptions& opts) {
  const LatticeBasis basis = prepared(basis0, opts);
  check_premise(basis, opts.search);
  return params_impl(basis, s, opts);
}

VerificationReport verify_counting(const LatticeBasis& basis0, double r, std::span<const double> u,
                                   const VerifyOptions& opts) {
  const LatticeBasis basis = prepared(basis0, opts);
  check_premise(basis, opts.search);
  return counting_impl(basis, r, u);
}

VerificationReport verify_covering(const LatticeBasis& basis0, std::optional<double> l_n, const VerifyOptions& opts) {
  return covering_impl(prepared(basis0, opts), l_n, opts);
}

VerificationReport verify_extreme(const LatticeBasis& basis0, double s, const VerifyOptions& opts) {
  const LatticeBasis basis = prepared(basis0, opts);
  check_premise(basis, opts.search);
  return extreme_impl(basis, s, opts);
}

VerificationReport verify_concentration(const LatticeBasis& basis, double tau, const VerifyOptions& opts) {
  if (!(tau >= 0)) throw InvalidInput("tau must be nonnegative");
  const VoronoiCell cell = relevant_vectors(basis);
  VerificationReport rep;
  rep.lattice_name = basis.name();
  rep.seed = opts.seed;
  rep.samples = opts.samples;

  // smallest t on a geometric grid with gamma_{1/t}(V) clearly above 2/3
  double t = 0;
  MonteCarloEstimate g0;
  for (int i = 0; i < 80; ++i) {
    const double cand = 0.05 * std::pow(1.1, i);
    g0 = gamma_voronoi(cell, 1 / cand, opts.samples, opts.seed);
    if (g0.mean >= 2.0 / 3 + 3 * g0.std_error) {
      t = cand;
      break;
    }
  }
  if (t == 0) throw Inconclusive("no t with gamma_{1/t}(V) >= 2/3 found");
  const double r = 0.5 * lambda1(basis);
  add_param(rep, "t", t);
  add_param(rep, "tau", tau);
  add_param(rep, "inradius", r);
  add_param(rep, "gamma_t", g0.mean);

  const MonteCarloEstimate g = gamma_voronoi(cell, 1 / (t + tau), opts.samples, opts.seed + 1);
  Check c = make_check("gaussian_concentration",
                       "Gaussian concentration: gamma_{1/(t+tau)}(K) >= 1 - exp(-pi r^2 tau^2)/3",
                       CheckMethod::monte_carlo);
  const double rhs = 1 - std::exp(-kPi * r * r * tau * tau) / 3;
  set_lhs(c, rhs, rhs);
  set_rhs(c, g.mean - 3 * g.std_error, g.mean + 3 * g.std_error);
  c.status = rhs <= c.rhs_upper ? CheckStatus::pass : CheckStatus::fail;
  c.note = "within 3 standard errors";
  rep.checks.push_back(c);
  return rep;
}

VerificationReport verify_log_convexity(const LatticeBasis& basis, double s, double t1, double t2,
                                        const VerifyOptions& opts) {
  if (!(t1 > s && s > t2 && t2 > 0)) throw InvalidInput("need t1 > s > t2 > 0");
  VerificationReport rep;
  rep.lattice_name = basis.name();
  const double nn = static_cast<double>(basis.rank());
  const double tau = std::log(s / t2) / std::log(t1 / t2);
  add_param(rep, "tau", tau);
  const MassInterval ms = gaussian_mass(basis, s, opts.eps);
  const MassInterval m1 = gaussian_mass(basis, t1, opts.eps);
  const MassInterval m2 = gaussian_mass(basis, t2, opts.eps);
  Check c = make_check("log_convexity",
                       "log-convexity of the Gaussian mass: rho_s(L) <= 2 e^{4n} rho_{t1}(L)^tau rho_{t2}(L)^{1-tau}");
  c.scale = "log";
  set_lhs(c, std::log(ms.lower), std::log(ms.upper));
  const double base = std::log(2.0) + 4 * nn;
  set_rhs(c, base + tau * std::log(m1.lower) + (1 - tau) * std::log(m2.lower),
          base + tau * std::log(m1.upper) + (1 - tau) * std::log(m2.upper));
  decide(c);
  rep.checks.push_back(c);
  return rep;
}

VerificationReport verify_rho_gamma(const LatticeBasis& basis, double s, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.lattice_name = basis.name();
  rep.seed = opts.seed;
  rep.samples = opts.samples;
  const double nn = static_cast<double>(basis.rank());
  const MassInterval m = gaussian_mass(basis, s, opts.eps);
  const MonteCarloEstimate g = gamma_voronoi(basis, s, opts.samples, opts.seed);
  add_param(rep, "s", s);
  add_param(rep, "rho", m.mid());
  add_param(rep, "gamma", g.mean);
  add_param(rep, "gamma_std_error", g.std_error);

  const double lo = m.lower * (g.mean - 3 * g.std_error), hi = m.upper * (g.mean + 3 * g.std_error);
  Check up = make_check("mass_times_cell_upper", "Voronoi mass sandwich: rho_s(L) gamma_s(V(L)) <= 1",
                        CheckMethod::monte_carlo);
  set_lhs(up, lo, hi);
  set_rhs(up, 1, 1);
  up.status = lo <= 1 ? CheckStatus::pass : CheckStatus::fail;
  up.note = "within 3 standard errors";
  rep.checks.push_back(up);

  Check down = make_check("mass_times_cell_lower", "Voronoi mass sandwich: exp(-4n)/2 <= rho_s(L) gamma_s(V(L))",
                          CheckMethod::monte_carlo);
  const double v = 0.5 * std::exp(-4 * nn);
  set_lhs(down, v, v);
  set_rhs(down, lo, hi);
  down.status = v <= hi ? CheckStatus::pass : CheckStatus::fail;
  down.note = "within 3 standard errors";
  rep.checks.push_back(down);
  return rep;
}

VerificationReport verify_zn_claims(std::size_t n, const std::vector<double>& s_list,
                                    const std::vector<double>& r_list) {
  if (n == 0) throw InvalidInput("n must be positive");
  VerificationReport rep;
  const LatticeBasis zn = LatticeBasis::identity(n);
  rep.lattice_name = "Z^" + std::to_string(n);
  const double nn = static_cast<double>(n);

  // rho_s(Z^n) = rho_s(Z)^n and, by Poisson summation, rho_s(Z) = s rho_{1/s}(Z),
  // so each bound reduces to one on the excess rho_u(Z) - 1 of a 1-D theta
  // series (u = s or 1/s). The excess is compared in the log domain. For the
  // lower bounds the gap 2 sum_{z >= 2} q^{z^2} >= 2q^4 can sit below double
  // resolution; then the second shell alone separates the two sides.
  const LatticeBasis z1 = LatticeBasis::identity(1);
  auto excess = [&](double u, double q) {
    MassOptions mo;
    mo.log_abs_width = std::log(q) - 60;
    return gaussian_mass(z1, u, 1e-12, mo);
  };
  auto lower_check = [&](const std::string& name, const std::string& anchor, double q, const MassInterval& m) {
    Check c = make_check(name, anchor);
    c.scale = "log";
    const double bound = std::log(2 * q);
    set_lhs(c, bound, bound);
    set_rhs(c, m.log_lower_excess, m.log_upper_excess);
    decide(c);
    if (c.status == CheckStatus::inconclusive && q > 0 && m.log_upper_excess >= bound) {
      c.status = CheckStatus::pass;
      c.note = "separated by the second shell: log(excess - 2q) >= " + fmt(std::log(2.0) + 4 * std::log(q));
    }
    c.note += c.note.empty() ? "per coordinate, log of the excess" : "; per coordinate, log of the excess";
    rep.checks.push_back(c);
  };
  auto upper_check = [&](const std::string& name, const std::string& anchor, double coef, double q,
                         const MassInterval& m) {
    Check c = make_check(name, anchor);
    c.scale = "log";
    const double bound = std::log(coef * q);
    set_lhs(c, m.log_lower_excess, m.log_upper_excess);
    set_rhs(c, bound, bound);
    decide(c);
    c.note = "per coordinate, log of the excess";
    rep.checks.push_back(c);
  };

  for (double s : s_list) {
    if (!(s > 0)) throw InvalidInput("s must be positive");
    const std::string tag = "[s=" + fmt(s) + "]";
    const double q = std::exp(-kPi / (s * s));
    const double p = std::exp(-kPi * s * s);
    const MassInterval m = gaussian_mass(zn, s, 1e-12);
    add_param(rep, "rho_lower" + tag, m.lower);
    add_param(rep, "rho_upper" + tag, m.upper);
    const MassInterval e1 = excess(s, q);
    const MassInterval e2 = excess(1 / s, p);
    lower_check("zn_mass_lower" + tag, "Gaussian mass of Z^n: (1 + 2e^{-pi/s^2})^n <= rho_s(Z^n)", q, e1);
    upper_check("zn_mass_upper" + tag, "Gaussian mass of Z^n: rho_s(Z^n) <= (1 + (2 + s)e^{-pi/s^2})^n", 2 + s, q,
                e1);
    lower_check("zn_mass_dual_lower" + tag, "Gaussian mass of Z^n, dual form: s^n (1 + 2e^{-pi s^2})^n <= rho_s(Z^n)",
                p, e2);
    upper_check("zn_mass_dual_upper" + tag,
                "Gaussian mass of Z^n, dual form: rho_s(Z^n) <= s^n (1 + (2 + 1/s)e^{-pi s^2})^n", 2 + 1 / s, p, e2);

    // the n-dimensional enclosure must be consistent with both sandwiches
    Check c = make_check("zn_mass_consistency" + tag, "Gaussian mass of Z^n: rho_s(Z^n) = rho_s(Z)^n = s^n rho_{1/s}(Z)^n");
    const double lo = std::max(std::pow(1 + 2 * q, nn), std::pow(s, nn) * std::pow(1 + 2 * p, nn));
    const double hi = std::min(std::pow(1 + (2 + s) * q, nn), std::pow(s, nn) * std::pow(1 + (2 + 1 / s) * p, nn));
    c.relation = "overlaps";
    set_lhs(c, m.lower, m.upper);
    set_rhs(c, lo, hi);
    c.status = m.upper >= lo * (1 - 1e-12) && m.lower <= hi ? CheckStatus::pass : CheckStatus::fail;
    rep.checks.push_back(c);
  }

  for (double r : r_list) {
    if (!(r > 0)) throw InvalidInput("radius must be positive");
    const std::string tag = "[r=" + fmt(r) + "]";
    const std::uint64_t count = count_points_in_ball(zn, r);
    const auto k = static_cast<long>(std::floor(r * r * (1 + 1e-15)));
    const bool in_hyp = r >= 1 && r * r <= nn * (1 + 1e-15);
    add_param(rep, "count" + tag, static_cast<double>(count));
    if (k < 1) continue;
    // exact rational lower bound (2n/k)^k
    Rational lb(static_cast<long>(2 * n), k);
    mpz_pow_ui(lb.get_num_mpz_t(), lb.get_num_mpz_t(), static_cast<unsigned long>(k));
    mpz_pow_ui(lb.get_den_mpz_t(), lb.get_den_mpz_t(), static_cast<unsigned long>(k));
    lb.canonicalize();
    const Rational cnt(static_cast<unsigned long>(count));
    const double ub = std::pow(2 * std::exp(3.0) * nn / static_cast<double>(k), static_cast<double>(k));

    Check c = make_check("zn_count" + tag,
                         "lattice points of Z^n in a ball: (2n/k)^k <= |Z^n cap rB| <= (2e^3 n/k)^k, k = floor(r^2)");
    c.relation = "in";
    set_lhs(c, static_cast<double>(count), static_cast<double>(count));
    set_rhs(c, to_double(lb), ub);
    const bool ok = lb <= cnt && static_cast<double>(count) <= ub;
    c.status = ok ? CheckStatus::pass : CheckStatus::fail;
    if (!in_hyp) {
      c.conditional = true;
      c.note = "radius outside 1 <= r <= sqrt(n); reported only";
    }
    rep.checks.push_back(c);
  }
  return rep;
}

LogBoundScan scan_claim_log_bound(std::size_t points, double lo, double hi) {
  if (points < 2 || !(lo > 1) || !(hi > lo)) throw InvalidInput("need at least 2 points and 1 < lo < hi");
  auto f = [](double x) {
    const double a = std::log1p(x - 1);
    const double b = std::log1p(1 / (x - 1));
    return std::exp(-2 * a * a) + std::exp(-2 * b * b);
  };
  LogBoundScan out;
  const double la = std::log(lo), lb = std::log(hi);
  out.max_value = -1;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : std::exp(la + (lb - la) * static_cast<double>(i) / (points - 1));
    const double v = f(i == 0 ? lo : x);
    if (v > out.max_value) {
      out.max_value = v;
      out.argmax = i == 0 ? lo : x;
    }
  }
  VerificationReport& rep = out.report;
  rep.lattice_name = "scalar";
  rep.samples = points;
  add_param(rep, "argmax", out.argmax);
  add_param(rep, "value_at_2", f(2));

  Check c = make_check("log_bound_scan", "scalar bound: exp(-2 log^2 x) + exp(-2 log^2(x/(x-1))) < 1",
                       CheckMethod::closed_form);
  set_lhs(c, out.max_value, out.max_value);
  set_rhs(c, 1, 1);
  decide(c, true);
  c.note = "maximum over " + std::to_string(points) + " log-spaced points, attained at x = " + fmt(out.argmax);
  rep.checks.push_back(c);
  return out;
}

RandomLattice2D sample_random_lattice_2d(std::uint64_t seed, std::uint64_t index) {
  const CounterRng rng(seed);
  RandomLattice2D out;
  for (std::uint64_t a = 0;; ++a) {
    const double x = rng.uniform(index, 2 * a) - 0.5;
    const double y = std::sqrt(3.0) / 2 / rng.uniform(index, 2 * a + 1);
    if (x * x + y * y >= 1) {
      out.x = x;
      out.y = y;
      break;
    }
  }
  const double sy = std::sqrt(out.y);
  RealMatrix b(2, 2);
  b(0, 0) = 1 / sy;
  b(0, 1) = 0;
  b(1, 0) = out.x / sy;
  b(1, 1) = sy;
  out.basis = LatticeBasis(b, "random2d");
  return out;
}

SiegelStats siegel_experiment(double r, std::uint64_t trials, std::uint64_t seed) {
  if (!(r > 0) || trials < 2) throw InvalidInput("need r > 0 and at least 2 trials");
  struct Acc {
    double sum = 0, sum_sq = 0;
    std::uint64_t stable = 0, tight = 0;
  };
  const double vol = kPi * r * r;
  auto parts = chunked<Acc>(trials, [&](std::uint64_t b, std::uint64_t e) {
    Acc a;
    for (std::uint64_t i = b; i < e; ++i) {
      const RandomLattice2D s = sample_random_lattice_2d(seed, i);
      const double c = static_cast<double>(count_points_in_ball(s.basis, r)) - 1;
      a.sum += c;
      a.sum_sq += c * c;
      if (shortest_vector(s.basis).norm >= 1 - 1e-12) ++a.stable;
      if (c + 1 >= vol / 2) ++a.tight;
    }
    return a;
  });
  Acc tot;
  for (const Acc& a : parts) {
    tot.sum += a.sum;
    tot.sum_sq += a.sum_sq;
    tot.stable += a.stable;
    tot.tight += a.tight;
  }
  const double nt = static_cast<double>(trials);
  SiegelStats out;
  out.mean = tot.sum / nt;
  out.variance = std::max(0.0, (tot.sum_sq - nt * out.mean * out.mean) / (nt - 1));
  out.std_error = std::sqrt(out.variance / nt);
  out.stable_fraction = static_cast<double>(tot.stable) / nt;
  out.stable_std_error = std::sqrt(out.stable_fraction * (1 - out.stable_fraction) / nt);
  out.tight_fraction = static_cast<double>(tot.tight) / nt;

  VerificationReport& rep = out.report;
  rep.lattice_name = "random2d";
  rep.seed = seed;
  rep.samples = trials;
  add_param(rep, "radius", r);
  add_param(rep, "mean", out.mean);
  add_param(rep, "variance", out.variance);
  add_param(rep, "std_error", out.std_error);
  add_param(rep, "stable_fraction", out.stable_fraction);
  add_param(rep, "tight_fraction", out.tight_fraction);

  // rare-event regime for small balls: widen to 5 sigma
  const double k = r < 0.5 ? 5 : 3;
  Check c = make_check("siegel_mean", "Siegel mean value theorem: E|(L \\ {0}) cap rB| = vol(rB)",
                       CheckMethod::monte_carlo);
  set_lhs(c, out.mean - k * out.std_error, out.mean + k * out.std_error);
  set_rhs(c, vol, vol);
  c.relation = "contains";
  c.status = c.lhs_lower <= vol && vol <= c.lhs_upper ? CheckStatus::pass : CheckStatus::fail;
  c.note = "within " + fmt(k) + " sample standard errors";
  rep.checks.push_back(c);

  Check st = make_check("stable_fraction", "stable fraction at n = 2: Pr[lambda1 >= 1] = 1 - 3/pi",
                        CheckMethod::monte_carlo);
  const double want = 1 - 3 / kPi;
  const double se = std::max(out.stable_std_error, std::sqrt(want * (1 - want) / nt));
  set_lhs(st, out.stable_fraction - 3 * se, out.stable_fraction + 3 * se);
  set_rhs(st, want, want);
  st.relation = "contains";
  st.status = st.lhs_lower <= want && want <= st.lhs_upper ? CheckStatus::pass : CheckStatus::fail;
  st.note = "within 3 standard errors";
  rep.checks.push_back(st);
  return out;
}

VerificationReport verify_suite(const LatticeBasis& basis0, const std::string& suite, const VerifyOptions& opts,
                                std::optional<double> l_n) {
  static const char* known[] = {"all", "rm", "params", "counting", "covering", "extreme"};
  if (std::find(std::begin(known), std::end(known), suite) == std::end(known))
    throw InvalidInput("unknown suite '" + suite + "'");
  const LatticeBasis basis = prepared(basis0, opts);
  const bool all = suite == "all";
  VerificationReport rep;
  rep.lattice_name = basis.name();
  rep.seed = opts.seed;
  rep.samples = opts.samples;
  const std::size_t n = basis.rank();
  const double nn = static_cast<double>(n);

  if (suite != "covering") {
    const CanonicalPlot plot = check_premise(basis, opts.search);
    const double t = rm_parameter(n);
    if (all || suite == "rm") rep.append(rm_impl(basis, plot, opts));
    if (all || suite == "params")
      for (double s : {1 / (2 * t), 1.0, 2 * t}) rep.append(params_impl(basis, s, opts));
    if (all || suite == "counting")
      for (double r : {1.0, 2.0}) rep.append(counting_impl(basis, r, {}));
    if (all || suite == "extreme")
      for (double s : {std::sqrt(2 * kPi / (nn + 2)), std::sqrt((nn + 2) / (2 * kPi))})
        rep.append(extreme_impl(basis, s, opts));
  }
  if (all || suite == "covering") rep.append(covering_impl(basis, l_n, opts));
  return rep;
}

}  // namespace latkit
