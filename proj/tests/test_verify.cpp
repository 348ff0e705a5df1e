#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "latkit/errors.hpp"
#include "latkit/verify.hpp"
#include "oracles.hpp"

using namespace latkit;

namespace {

constexpr double pi = std::numbers::pi;

LatticeBasis intro(int t) { return LatticeBasis(RatMatrix::from_rows({{Rational(1, t), 0}, {0, Rational(t * t)}})); }

LatticeBasis hexagonal() {
  RealMatrix b(2, 2);
  b(0, 0) = 1;
  b(0, 1) = 0;
  b(1, 0) = 0.5;
  b(1, 1) = std::sqrt(3.0) / 2;
  return normalized(LatticeBasis(b, "hex"));
}

LatticeBasis rotated_z3() {
  const double c = std::cos(0.7), s = std::sin(0.7), c2 = std::cos(0.3), s2 = std::sin(0.3);
  RealMatrix a(3, 3);  // rotation about z, then about x
  const double r1[3][3] = {{c, -s, 0}, {s, c, 0}, {0, 0, 1}};
  const double r2[3][3] = {{1, 0, 0}, {0, c2, -s2}, {0, s2, c2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0;
      for (int k = 0; k < 3; ++k) v += r1[i][k] * r2[k][j];
      a(i, j) = v;
    }
  return LatticeBasis(a, "rotated_z3");
}

// d_1 = 1, d_k = (k-1)^{(k-1)/2} / k^{k/2}
LatticeBasis diagonal_example(int n) {
  RealMatrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = 0;
  b(0, 0) = 1;
  for (int k = 2; k <= n; ++k) b(k - 1, k - 1) = std::pow(k - 1.0, (k - 1) / 2.0) / std::pow(k, k / 2.0);
  return LatticeBasis(b, "diagonal example");
}

const Check& find(const VerificationReport& r, const std::string& prefix) {
  for (const Check& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return c;
  FAIL("no check named " << prefix);
  return r.checks.front();
}

bool has(const VerificationReport& r, const std::string& prefix) {
  for (const Check& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return true;
  return false;
}

double param(const VerificationReport& r, const std::string& key) {
  for (const auto& [k, v] : r.parameters)
    if (k == key) return v;
  FAIL("no parameter " << key);
  return 0;
}

}  // namespace

TEST_CASE("reverse Minkowski reports") {
  VerificationReport z4 = verify_reverse_minkowski(LatticeBasis::identity(4));
  CHECK(z4.passed());
  const Check& rm = find(z4, "reverse_minkowski");
  CHECK(param(z4, "log_excess_upper") < std::log(1e-100));
  CHECK(rm.lhs_upper <= 1.5);
  CHECK(param(z4, "t") == doctest::Approx(10 * (std::log(4.0) + 2)));

  CHECK(verify_reverse_minkowski(hexagonal()).passed());
  CHECK(verify_reverse_minkowski(rotated_z3()).passed());

  try {
    verify_reverse_minkowski(intro(10));
    FAIL("expected PremiseNotMet");
  } catch (const PremiseNotMet& e) {
    CHECK(e.witness_det == doctest::Approx(0.1));
    CHECK(e.witness_rank == 1);
  }
  CHECK_THROWS_AS(verify_reverse_minkowski(LatticeBasis::diagonal({Rational(1, 2), Rational(2)})), PremiseNotMet);
}

TEST_CASE("normalization") {
  LatticeBasis d = normalized(LatticeBasis::diagonal({Rational(2), Rational(2)}));
  REQUIRE(d.is_exact());
  CHECK(d.exact_gram_det() == 1);
  LatticeBasis f = normalized(diagonal_example(4));
  CHECK_FALSE(f.is_exact());
  CHECK(f.det() == doctest::Approx(1).epsilon(1e-12));
  LatticeBasis q = normalized(LatticeBasis::diagonal({Rational(1), Rational(2)}));
  CHECK_FALSE(q.is_exact());  // 2^{-1/2} is irrational
  CHECK(q.det() == doctest::Approx(1).epsilon(1e-12));

  VerifyOptions o;
  o.normalize = true;
  CHECK(verify_reverse_minkowski(LatticeBasis::diagonal({Rational(3), Rational(3), Rational(3)}), o).passed());
  // scaled up, every sublattice is sparser: the premise already holds
  CHECK(verify_reverse_minkowski(LatticeBasis::diagonal({Rational(3), Rational(3), Rational(3)})).passed());
  CHECK_THROWS_AS(verify_reverse_minkowski(LatticeBasis::diagonal({Rational(1, 3), Rational(1, 3)})), PremiseNotMet);
  CHECK(verify_reverse_minkowski(LatticeBasis::diagonal({Rational(1, 3), Rational(1, 3)}), o).passed());
}

TEST_CASE("reverse Minkowski at all parameters") {
  const LatticeBasis z2 = LatticeBasis::identity(2);
  const double t = rm_parameter(2);
  VerificationReport large = verify_all_parameters(z2, 2 * t);
  CHECK(large.passed());
  CHECK(find(large, "all_parameters_large_s").rhs_lower == doctest::Approx(2 * 4 * t * t));
  // rho_s(Z^2) = theta(s)^2
  const double th = oracle::theta_1d(2 * t, 0, 2000);
  CHECK(find(large, "all_parameters_large_s").lhs_lower <= th * th * (1 + 1e-9));
  CHECK(find(large, "all_parameters_large_s").lhs_upper >= th * th * (1 - 1e-9));

  VerificationReport small = verify_all_parameters(z2, 1 / (2 * t));
  CHECK(small.passed());
  const Check& c = find(small, "all_parameters_small_s_lambda1");
  CHECK(c.scale == "log");
  // leading excess 4 exp(-pi 4 t^2)
  const double lead = std::log(4.0) - 4 * pi * t * t;
  CHECK(c.lhs_lower <= lead);
  CHECK(c.lhs_upper >= lead);
  CHECK(c.lhs_upper <= c.rhs_lower);

  VerificationReport mid = verify_all_parameters(z2, 1);
  CHECK(mid.passed());
  CHECK(has(mid, "all_parameters_intermediate"));
}

TEST_CASE("counting reports") {
  VerificationReport z8 = verify_counting(LatticeBasis::identity(8), 2);
  CHECK(z8.passed());
  CHECK(param(z8, "count") == static_cast<double>(oracle::box_count_zn(8, 4)));
  const Check& big = find(z8, "counting_large_r");
  CHECK(big.conditional);  // r = 2 lies below sqrt(n/(2 pi)) t
  CHECK(big.status == CheckStatus::pass);
  CHECK(big.rhs_lower == doctest::Approx(std::log(2 * std::pow(2 * pi * std::numbers::e * 4 / 8, 4))));

  const std::vector<double> u(4, 0.5);
  VerificationReport z4 = verify_counting(LatticeBasis::identity(4), 1, u);
  CHECK(z4.passed());
  CHECK(param(z4, "count") == 16);
  CHECK(has(z4, "counting_small_r"));

  CHECK_THROWS_AS(verify_counting(intro(2), 1), PremiseNotMet);
}

TEST_CASE("covering reports") {
  VerifyOptions o;
  o.samples = 100'000;
  VerificationReport z4 = verify_covering(LatticeBasis::identity(4), std::nullopt, o);
  CHECK(z4.passed());
  CHECK(param(z4, "mu_lower") == doctest::Approx(1));
  CHECK(param(z4, "mu_det") == doctest::Approx(2));
  CHECK(find(z4, "covering_lower").lhs_upper == doctest::Approx(2 / std::sqrt(2 * pi * std::numbers::e)));
  CHECK(has(z4, "covering_stable"));
  CHECK_FALSE(has(z4, "covering_slicing"));

  VerificationReport f6 = verify_covering(diagonal_example(6), std::nullopt, o);
  CHECK(f6.passed());
  double mu2 = 0;
  for (int k = 1; k <= 6; ++k) mu2 += k == 1 ? 0.25 : 0.25 * std::pow(k - 1.0, k - 1.0) / std::pow(k, k);
  CHECK(param(f6, "mu_upper") == doctest::Approx(std::sqrt(mu2)).epsilon(1e-12));
  CHECK(param(f6, "mu_det") == doctest::Approx(1).epsilon(1e-9));
  CHECK_FALSE(has(f6, "covering_stable"));

  VerificationReport z2 = verify_covering(LatticeBasis::identity(2), 10.0, o);
  CHECK(z2.passed());
  CHECK(find(z2, "covering_stable").lhs_upper == doctest::Approx(std::sqrt(0.5)));
  CHECK(find(z2, "covering_slicing").conditional);

  // a failing conditional check does not decide the outcome
  VerificationReport tiny = verify_covering(LatticeBasis::identity(2), 1e-6, o);
  CHECK(find(tiny, "covering_slicing").status == CheckStatus::fail);
  CHECK(tiny.passed());
}

TEST_CASE("extreme parameters") {
  const double s3 = std::sqrt(2 * pi / 5);
  VerificationReport rot = verify_extreme(rotated_z3(), s3);
  CHECK(rot.passed());
  CHECK(verify_extreme(LatticeBasis::identity(3), std::sqrt(5 / (2 * pi))).passed());

  VerificationReport hex = verify_extreme(hexagonal(), std::sqrt(pi / 2));
  CHECK(hex.passed());
  const Check& c = find(hex, "extreme_parameters");
  CHECK(c.lhs_upper < c.rhs_lower);  // strict for the hexagonal lattice
  CHECK(verify_extreme(hexagonal(), std::sqrt(2 / pi)).passed());

  // n = 6: the extreme ranges are s <= 0.886 and s >= 1.128
  CHECK_THROWS_AS(verify_extreme(LatticeBasis::identity(6), 1.0), NotApplicable);
}

TEST_CASE("Gaussian concentration") {
  VerifyOptions o;
  o.samples = 100'000;
  VerificationReport r = verify_concentration(LatticeBasis::identity(2), 1, o);
  CHECK(r.passed());
  CHECK(param(r, "inradius") == doctest::Approx(0.5));
  CHECK(param(r, "gamma_t") >= 2.0 / 3);
  CHECK(verify_concentration(LatticeBasis::identity(2), 0, o).passed());

  // rotation invariance: the search lands on the same t
  const double c = std::cos(0.4), s = std::sin(0.4);
  RealMatrix b(2, 2);
  b(0, 0) = c;
  b(0, 1) = s;
  b(1, 0) = -s;
  b(1, 1) = c;
  VerificationReport rr = verify_concentration(LatticeBasis(b), 1, o);
  CHECK(rr.passed());
  CHECK(param(rr, "t") == doctest::Approx(param(r, "t")));
}

TEST_CASE("log-convexity of the mass") {
  CHECK(verify_log_convexity(LatticeBasis::identity(2), 1, 2, 0.5).passed());
  std::mt19937_64 rng(5);
  LatticeBasis r3 = oracle::exact_basis(oracle::random_int_basis(rng, 3, 3));
  CHECK(verify_log_convexity(r3, 1, 3, 1.0 / 3).passed());
  VerificationReport near = verify_log_convexity(LatticeBasis::identity(2), 0.5 + 1e-9, 2, 0.5);
  CHECK(param(near, "tau") == doctest::Approx(0).epsilon(1e-6));
  CHECK(near.passed());
  CHECK_THROWS_AS(verify_log_convexity(LatticeBasis::identity(2), 3, 2, 1), InvalidInput);
}

TEST_CASE("mass times cell volume") {
  VerifyOptions o;
  o.samples = 100'000;
  for (double s : {0.5, 1.0, 2.0}) {
    VerificationReport r = verify_rho_gamma(LatticeBasis::identity(2), s, o);
    CHECK(r.passed());
  }
  // Z: rho_s(Z) gamma_s([-1/2, 1/2]) with gamma_s = erf(sqrt(pi)/(2s))
  VerificationReport z = verify_rho_gamma(LatticeBasis::identity(1), 1, o);
  CHECK(param(z, "gamma") == doctest::Approx(std::erf(std::sqrt(pi) / 2)).epsilon(5e-3));
  CHECK(param(z, "rho") == doctest::Approx(oracle::theta_1d(1)).epsilon(1e-9));
}

TEST_CASE("mass and count claims for Z^n") {
  for (std::size_t n : {1u, 2u, 8u}) {
    VerificationReport r = verify_zn_claims(n, {0.5, 1, 3}, {1, 2});
    CHECK(r.passed());
    for (const Check& c : r.checks) CHECK_MESSAGE(c.status == CheckStatus::pass, c.name);
  }
  VerificationReport z8 = verify_zn_claims(8, {}, {2});
  const Check& c = find(z8, "zn_count");
  CHECK_FALSE(c.conditional);
  CHECK(c.lhs_lower == 1713);
  CHECK(c.rhs_lower == 256);
  CHECK(c.rhs_upper == doctest::Approx(std::pow(4 * std::exp(3.0), 4)));
  // r = 2 > sqrt(2) is outside the hypothesis for n = 2
  CHECK(find(verify_zn_claims(2, {}, {2}), "zn_count").conditional);
  // the s = 1/2 lower bound is separated only by the second shell
  const Check& tight = find(verify_zn_claims(1, {0.5}, {}), "zn_mass_lower");
  CHECK(tight.status == CheckStatus::pass);
}

TEST_CASE("scalar log bound scan") {
  LogBoundScan s = scan_claim_log_bound(100'000);
  CHECK(s.max_value < 1);
  CHECK(s.report.passed());
  const double at2 = 2 * std::exp(-2 * std::log(2.0) * std::log(2.0));
  CHECK(param(s.report, "value_at_2") == doctest::Approx(at2).epsilon(1e-14));
  CHECK(at2 == doctest::Approx(0.76509).epsilon(1e-5));
  // x = 2 is a local minimum; the sum tends to 1 at both ends of the range
  CHECK(s.max_value > 0.999);
  LogBoundScan near1 = scan_claim_log_bound(2, 1.0001, 1.0002);
  CHECK(near1.max_value < 1);
}

TEST_CASE("random two-dimensional lattices") {
  const int trials = 100'000;
  double sum = 0, sum_sq = 0, below = 0;
  for (int i = 0; i < trials; ++i) {
    RandomLattice2D r = sample_random_lattice_2d(3, i);
    if (i < 1000) {
      CHECK(std::abs(r.x) <= 0.5);
      CHECK(r.x * r.x + r.y * r.y >= 1);
      CHECK(r.basis.det() == doctest::Approx(1).epsilon(1e-15));
    }
    sum += 1 / r.y;
    sum_sq += 1 / (r.y * r.y);
    if (r.y <= 1) below += 1;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  // integral of 1/y against dx dy / y^2 over the domain, normalized by pi/3
  CHECK(std::abs(mean - 3 * std::log(3.0) / (2 * pi)) <= 3 * se);
  const double p = 1 - 3 / pi;
  CHECK(std::abs(below / trials - p) <= 3 * std::sqrt(p * (1 - p) / trials));

  RandomLattice2D a = sample_random_lattice_2d(9, 4), b = sample_random_lattice_2d(9, 4);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("Siegel mean value at n = 2") {
  SiegelStats s = siegel_experiment(3, 2000, 0);
  CHECK(s.report.passed());
  CHECK(std::abs(s.mean - 9 * pi) <= 3 * s.std_error);
  CHECK(s.variance > 0);
  SiegelStats small = siegel_experiment(0.1, 2000, 1);
  CHECK(find(small.report, "siegel_mean").status == CheckStatus::pass);

  SiegelStats again = siegel_experiment(3, 2000, 0);
  CHECK(report_to_json(again.report).dump() == report_to_json(s.report).dump());
}

TEST_CASE("verification suites") {
  VerifyOptions o;
  o.samples = 50'000;
  VerificationReport z4 = verify_suite(LatticeBasis::identity(4), "all", o);
  CHECK(z4.passed());
  for (const char* p : {"reverse_minkowski", "eta_sandwich_upper", "all_parameters_small_s", "all_parameters_large_s",
                        "all_parameters_intermediate", "counting_small_r", "extreme_parameters", "covering_upper"})
    CHECK_MESSAGE(has(z4, p), p);
  CHECK_THROWS_AS(verify_suite(intro(10), "all", o), PremiseNotMet);
  CHECK(verify_suite(diagonal_example(5), "covering", o).passed());
  CHECK_THROWS_AS(verify_suite(LatticeBasis::identity(2), "bogus", o), InvalidInput);

  nlohmann::json j = report_to_json(z4);
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() == z4.checks.size());
  for (const auto& c : j["checks"]) CHECK_FALSE(c["anchor"].get<std::string>().empty());
}
