#include <doctest.h>

#include <cmath>
#include <random>

#include "latkit/stability.hpp"
#include "oracles.hpp"

using namespace latkit;

namespace {

LatticeBasis intro(int t) { return LatticeBasis(RatMatrix::from_rows({{Rational(1, t), 0}, {0, Rational(t * t)}})); }

LatticeBasis diag(std::vector<Rational> d) { return LatticeBasis::diagonal(d); }

// min over rank-k sublattices of det^2, by the coefficient box; ranks above
// d/2 go through the dual: det(M)^2 = det(L)^2 det(M*)^2.
Rational oracle_min(const LatticeBasis& b, int k, int box) {
  const int d = static_cast<int>(b.rank());
  if (k == d) return b.exact_gram_det();
  if (2 * k <= d) return oracle::box_min_gram_det(b.exact_rows(), k, box);
  return b.exact_gram_det() * oracle::box_min_gram_det(dual_basis(b).exact_rows(), d - k, box);
}

LatticeBasis reduced_random(std::mt19937_64& rng, int n) {
  return lll_reduce(oracle::exact_basis(oracle::random_int_basis(rng, n, 3))).basis;
}

}  // namespace

TEST_CASE("densest sublattices of small examples") {
  for (int n = 1; n <= 4; ++n)
    for (int k = 1; k <= n; ++k) {
      DensestResult r = densest_sublattice(LatticeBasis::identity(n), k);
      CHECK(r.certified);
      CHECK(*r.witness.gram_det == 1);
    }

  DensestResult i1 = densest_sublattice(intro(10), 1);
  CHECK(i1.certified);
  CHECK(i1.witness.coefficients == IntMatrix::from_rows({{1, 0}}));
  CHECK(*i1.witness.gram_det == Rational(1, 100));

  DensestResult d2 = densest_sublattice(diag({1, Rational(1, 2), 2}), 2);
  CHECK(*d2.witness.gram_det == Rational(1, 4));
  CHECK(d2.witness.coefficients == IntMatrix::from_rows({{1, 0, 0}, {0, 1, 0}}));
  CHECK(d2.witness.primitive);
}

TEST_CASE("densest sublattices match the coefficient-box oracle") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial % 2;
    LatticeBasis b = reduced_random(rng, n);
    for (int k = 1; k < n; ++k) {
      DensestResult r = densest_sublattice(b, k);
      CHECK(r.certified);
      CHECK(*r.witness.gram_det == oracle_min(b, k, 3));
      // the primal search alone agrees with the dual route
      DensestResult p = densest_sublattice(b, k, SearchOptions{20'000'000, 1.0, false});
      CHECK(*p.witness.gram_det == *r.witness.gram_det);
      CHECK(p.witness.coefficients == r.witness.coefficients);
    }
  }
}

TEST_CASE("the answer does not depend on the input basis") {
  std::mt19937_64 rng(103);
  LatticeBasis b = reduced_random(rng, 4);
  IntMatrix u = oracle::random_unimodular(rng, 4);
  LatticeBasis bu(to_rational(u) * b.exact_rows());
  for (int k = 1; k < 4; ++k) {
    CHECK(*densest_sublattice(b, k).witness.gram_det == *densest_sublattice(bu, k).witness.gram_det);
  }
}

TEST_CASE("budget exhaustion is reported, not thrown") {
  SearchOptions tiny{2, 1.0, true};
  DensestResult r = densest_sublattice(LatticeBasis::identity(4), 2, tiny);
  CHECK_FALSE(r.certified);
  CHECK(r.witness.rank == 2);
  CHECK(r.witness.primitive);
}

TEST_CASE("canonical plots") {
  CanonicalPlot z3 = canonical_plot(LatticeBasis::identity(3));
  for (double v : z3.min_log_det) CHECK(v == doctest::Approx(0.0));

  CanonicalPlot i10 = canonical_plot(intro(10));
  CHECK(i10.min_log_det[0] == 0);
  CHECK(i10.min_log_det[1] == doctest::Approx(-std::log(10.0)));
  CHECK(i10.min_log_det[2] == doctest::Approx(std::log(10.0)));

  CanonicalPlot d = canonical_plot(diag({Rational(1, 2), Rational(1, 2), 4}));
  CHECK(d.min_log_det[1] == doctest::Approx(-std::log(2.0)));
  CHECK(d.min_log_det[2] == doctest::Approx(-2 * std::log(2.0)));
  CHECK(d.min_log_det[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("canonical filtrations") {
  for (int n = 1; n <= 4; ++n) {
    FiltrationChain f = canonical_filtration(LatticeBasis::identity(n));
    CHECK(f.chain.size() == 2);
    CHECK(f.chain.front().rank == 0);
    CHECK(f.chain.back().rank == static_cast<std::size_t>(n));
  }

  FiltrationChain i = canonical_filtration(intro(10));
  REQUIRE(i.chain.size() == 3);
  CHECK(i.chain[1].coefficients == IntMatrix::from_rows({{1, 0}}));
  CHECK(i.slopes[0] == doctest::Approx(-std::log(10.0)));
  CHECK(i.slopes[1] == doctest::Approx(2 * std::log(10.0)));

  // (1/2)Z + 2Z + Z
  LatticeBasis sum = direct_sum(direct_sum(diag({Rational(1, 2)}), diag({2})), LatticeBasis::identity(1));
  FiltrationChain f = canonical_filtration(sum);
  REQUIRE(f.chain.size() == 4);
  CHECK(f.nested);
  CHECK(f.certified);
  CHECK(f.slopes[0] == doctest::Approx(-std::log(2.0)));
  CHECK(f.slopes[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.slopes[2] == doctest::Approx(std::log(2.0)));
  for (std::size_t s = 1; s < f.chain.size(); ++s) {
    LatticeBasis q = filtration_quotient(sum, f, s);
    CHECK(q.is_exact());
    CHECK(is_stable(q).stable);
  }
}

TEST_CASE("collinear plot points are not vertices") {
  // Z (+) 2Z (+) 2Z (+) 4Z: the plot is piecewise linear with a kink only at ranks 1 and 3
  LatticeBasis b = diag({1, 2, 2, 4});
  CanonicalPlot p = canonical_plot(b);
  auto v = hull_vertices(b, p);
  CHECK(v == std::vector<std::size_t>{0, 1, 3, 4});
}

TEST_CASE("filtration invariants on random lattices") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 6; ++trial) {
    LatticeBasis b = reduced_random(rng, 3 + trial % 2);
    FiltrationChain f = canonical_filtration(b);
    CHECK(f.certified);
    CHECK(f.nested);
    for (std::size_t s = 1; s < f.slopes.size(); ++s) CHECK(f.slopes[s - 1] < f.slopes[s]);
    for (std::size_t s = 1; s < f.chain.size(); ++s) {
      CHECK(f.chain[s - 1].rank < f.chain[s].rank);
      CHECK(is_stable(filtration_quotient(b, f, s)).stable);
    }
  }
}

TEST_CASE("stability") {
  for (int n = 1; n <= 4; ++n) {
    StabilityCertificate c = is_stable(LatticeBasis::identity(n));
    CHECK(c.stable);
    CHECK(c.det_one_check);
    CHECK(c.search_certified);
  }
  StabilityCertificate i = is_stable(intro(10));
  CHECK_FALSE(i.stable);
  REQUIRE(i.failing_witness);
  CHECK(i.failing_witness->det() == doctest::Approx(0.1));

  StabilityCertificate two = is_stable(diag({2}));
  CHECK_FALSE(two.stable);
  CHECK_FALSE(two.det_one_check);
  CHECK_FALSE(two.failing_witness);

  // the hexagonal lattice normalized to det 1 is stable, in float mode
  const double s = std::sqrt(2 / std::sqrt(3.0));
  LatticeBasis hex(RealMatrix::from_rows({{s, 0}, {s / 2, s * std::sqrt(3.0) / 2}}));
  CHECK(is_stable(hex).stable);

  // duals and direct sums of stable lattices stay stable
  LatticeBasis a(RatMatrix::from_rows({{1, 1}, {0, 1}}));
  CHECK(is_stable(a).stable);
  CHECK(is_stable(dual_basis(a)).stable);
  CHECK(is_stable(direct_sum(a, LatticeBasis::identity(2))).stable);
}

TEST_CASE("eta_det and mu_det") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(eta_det(LatticeBasis::identity(n)).value == doctest::Approx(1.0));
    CHECK(mu_det(LatticeBasis::identity(n)).value == doctest::Approx(std::sqrt(n)));
  }
  CHECK(eta_det(intro(10)).value == doctest::Approx(10.0));
  CHECK(eta_det(diag({Rational(1, 2), 2})).value == doctest::Approx(2.0));
  LatticeBasis z2x3 = scaled(LatticeBasis::identity(2), Rational(3));
  CHECK(mu_det(z2x3).value == doctest::Approx(3 * std::sqrt(2.0)));

  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 4; ++trial) {
    LatticeBasis b = reduced_random(rng, 3);
    const double n = 3;
    CHECK(eta_det(b).value >= std::exp(-b.log_det() / n) * (1 - 1e-12));
    CHECK(mu_det(b).value >= std::sqrt(n) * std::exp(b.log_det() / n) * (1 - 1e-12));
  }
}

TEST_CASE("uncrossing") {
  LatticeBasis z2 = LatticeBasis::identity(2);
  auto e1 = make_witness(z2, IntMatrix::from_rows({{1, 0}}), true);
  auto diagonal = make_witness(z2, IntMatrix::from_rows({{1, 1}}), true);
  UncrossingReport r = uncrossing_check(z2, e1, diagonal);
  CHECK(r.meet.rank == 0);
  CHECK(r.join.rank == 2);
  CHECK(r.det_join == doctest::Approx(1.0));
  CHECK(r.det2 == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.rank_identity);
  CHECK(r.inequality);

  UncrossingReport same = uncrossing_check(z2, diagonal, diagonal);
  CHECK(same.det_meet * same.det_join == doctest::Approx(same.det1 * same.det2));
  CHECK(same.inequality);

  auto twice = make_witness(z2, IntMatrix::from_rows({{2, 0}}));
  CHECK_THROWS_AS(uncrossing_check(z2, twice, e1), NotPrimitive);

  // the sum is not always saturated: (1,1) and (1,-1) generate an index-2 sublattice
  auto anti = make_witness(z2, IntMatrix::from_rows({{1, -1}}), true);
  UncrossingReport idx = uncrossing_check(z2, diagonal, anti);
  CHECK(*idx.join.gram_det == 4);
  CHECK(*idx.saturated_join.gram_det == 1);
  CHECK(idx.inequality);

  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> c(-2, 2), kk(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    LatticeBasis b = oracle::exact_basis(oracle::random_int_basis(rng, 4));
    auto random_sub = [&] {
      while (true) {
        IntMatrix m(kk(rng), 4);
        for (std::size_t i = 0; i < m.rows(); ++i)
          for (std::size_t j = 0; j < 4; ++j) m(i, j) = c(rng);
        if (matrix_rank(to_rational(m)) == m.rows()) return saturate(b, make_witness(b, m));
      }
    };
    UncrossingReport u = uncrossing_check(b, random_sub(), random_sub());
    CHECK(u.rank_identity);
    CHECK(u.inequality);
  }
}

TEST_CASE("reverse AM-GM bound") {
  CHECK(reverse_amgm_bound({1}, {1}) == doctest::Approx(2 * std::numbers::e));
  CHECK(reverse_amgm_bound({1, 2}, {1, 1}) == doctest::Approx(2 * std::numbers::e * 2 * 2 * std::sqrt(2.0)));
  CHECK_THROWS_AS(reverse_amgm_bound({2, 1}, {1, 1}), InvalidInput);

  std::mt19937_64 rng(127);
  std::uniform_int_distribution<int> len(1, 6), deg(1, 5);
  std::uniform_real_distribution<double> step(0.01, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = len(rng);
    std::vector<double> a;
    std::vector<int> d;
    double x = step(rng);
    for (int i = 0; i < k; ++i) {
      a.push_back(x);
      d.push_back(deg(rng));
      x += step(rng);
    }
    double lhs = 0;
    for (int i = 0; i < k; ++i) lhs += d[i] * a[i];
    CHECK(reverse_amgm_bound(a, d) >= lhs);
  }
}
