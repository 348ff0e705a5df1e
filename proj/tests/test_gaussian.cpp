#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "latkit/enumerate.hpp"
#include "latkit/gaussian.hpp"
#include "oracles.hpp"

using namespace latkit;

namespace {

// rho_s(B e^{A/2}) summed over a coefficient box, A symmetric.
double rho_deformed(const LatticeBasis& b, double s, const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::MatrixXd half = es.eigenvectors() * (es.eigenvalues() / 2).array().exp().matrix().asDiagonal() *
                         es.eigenvectors().transpose();
  const std::size_t n = b.rank();
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0;
      for (std::size_t k = 0; k < n; ++k) v += b.rows()(i, k) * half(k, j);
      m(i, j) = v;
    }
  return gaussian_mass(LatticeBasis(std::move(m)), s, 1e-15, MassOptions{5e7, false, false, {}}).mid();
}

// Second differences along an orthonormal basis of trace-zero symmetric matrices.
double fd_laplacian(const LatticeBasis& b, double s, double h) {
  const int n = static_cast<int>(b.rank());
  std::vector<Eigen::MatrixXd> dirs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(i, j) = e(j, i) = 1 / std::sqrt(2.0);
      dirs.push_back(e);
    }
  for (int k = 1; k < n; ++k) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < k; ++i) e(i, i) = 1;
    e(k, k) = -k;
    dirs.push_back(e / std::sqrt(static_cast<double>(k * (k + 1))));
  }
  const double f0 = rho_deformed(b, s, Eigen::MatrixXd::Zero(n, n));
  double lap = 0;
  for (const auto& e : dirs) lap += (rho_deformed(b, s, h * e) - 2 * f0 + rho_deformed(b, s, -h * e)) / (h * h);
  return lap;
}

}  // namespace

TEST_CASE("mass of Z against the one-dimensional sum") {
  MassInterval m = gaussian_mass(LatticeBasis::identity(1), 1.0, 1e-12);
  CHECK(m.lower >= 1 + 2 * std::exp(-oracle::pi));
  CHECK(m.upper <= 1 + 3 * std::exp(-oracle::pi));
  CHECK(m.contains(oracle::theta_1d(1.0)));
  CHECK(m.mid() == doctest::Approx(1.0864348112).epsilon(1e-10));
  CHECK(m.width() <= 1e-12 * m.lower);
}

TEST_CASE("tiny parameter keeps the excess") {
  MassInterval m = gaussian_mass(LatticeBasis::identity(4), 0.1, 1e-120);
  CHECK(m.lower >= 1);
  CHECK(m.log_upper_excess <= std::log(1e-100));
}

TEST_CASE("product and block structure") {
  const double z1 = oracle::theta_1d(1.3);
  MassInterval m4 = gaussian_mass(LatticeBasis::identity(4), 1.3, 1e-12);
  CHECK(m4.mid() == doctest::Approx(std::pow(z1, 4)).epsilon(1e-11));

  // a non-orthogonal copy evaluated without block splitting
  std::mt19937_64 rng(5);
  LatticeBasis a = oracle::exact_basis(oracle::random_int_basis(rng, 2));
  LatticeBasis b = oracle::exact_basis(oracle::random_int_basis(rng, 2));
  MassInterval ma = gaussian_mass(a, 2.0, 1e-12), mb = gaussian_mass(b, 2.0, 1e-12);
  MassInterval ms = gaussian_mass(direct_sum(a, b), 2.0, 1e-12, MassOptions{5e7, true, false, {}});
  CHECK(ms.lower <= ma.upper * mb.upper);
  CHECK(ms.upper >= ma.lower * mb.lower);
}

TEST_CASE("mass grows with s") {
  std::mt19937_64 rng(41);
  LatticeBasis b = oracle::exact_basis(oracle::random_int_basis(rng, 3));
  double prev_upper = 0;
  double prev_lower = 0;
  for (double s : {0.3, 0.7, 1.0, 2.0, 4.0}) {
    MassInterval m = gaussian_mass(b, s, 1e-10);
    CHECK(m.upper >= prev_lower);
    CHECK(m.lower >= prev_lower);
    prev_lower = m.lower;
    prev_upper = m.upper;
  }
  CHECK(prev_upper > 1);
}

TEST_CASE("dual route agrees with direct summation") {
  LatticeBasis b(RatMatrix::from_rows({{2, 1, 0}, {0, 1, 1}, {1, 0, 3}}));
  MassOptions direct{5e7, false, false, {}};
  MassInterval d = gaussian_mass(b, 3.0, 1e-12, direct);
  MassInterval any = gaussian_mass(b, 3.0, 1e-12);
  CHECK(d.lower <= any.upper);
  CHECK(any.lower <= d.upper);
}

TEST_CASE("Poisson summation residual") {
  PsfResidual z3 = psf_residual(LatticeBasis::identity(3), 1.0);
  CHECK(z3.residual <= 1e-9);
  CHECK(z3.residual <= z3.tolerance);
  PsfResidual z = psf_residual(LatticeBasis::identity(1), 2.0);
  CHECK(z.residual <= 1e-9);
  CHECK(z.primal.mid() == doctest::Approx(2 * z.dual.mid()).epsilon(1e-12));

  LatticeBasis b(RealMatrix::from_rows({{1.1, 0.3, 0.0}, {-0.2, 0.9, 0.4}, {0.5, 0.1, 1.4}}));
  PsfResidual r = psf_residual(b, 1.3);
  CHECK(r.residual <= r.tolerance);
}

TEST_CASE("Z^n sandwich bounds") {
  for (int n : {1, 2, 8}) {
    for (double s : {0.5, 1.0, 3.0}) {
      MassInterval m = gaussian_mass(LatticeBasis::identity(n), s, 1e-12);
      const double e1 = std::exp(-oracle::pi / (s * s)), e2 = std::exp(-oracle::pi * s * s);
      CHECK(std::pow(1 + 2 * e1, n) <= m.upper);
      CHECK(m.lower <= std::pow(1 + (2 + s) * e1, n));
      CHECK(std::pow(s, n) * std::pow(1 + 2 * e2, n) <= m.upper);
      CHECK(m.lower <= std::pow(s, n) * std::pow(1 + (2 + 1 / s) * e2, n));
    }
  }
}

TEST_CASE("shifted masses") {
  LatticeBasis z = LatticeBasis::identity(1);
  std::vector<double> zero = {0.0}, half = {0.5}, one = {1.0};
  MassInterval base = gaussian_mass(z, 1.0, 1e-12);
  MassInterval at_one = shifted_mass(z, one, 1.0, 1e-12);
  CHECK(at_one.lower <= base.upper);
  CHECK(base.lower <= at_one.upper);
  MassInterval h = shifted_mass(z, half, 1.0, 1e-12);
  CHECK(h.contains(oracle::theta_1d(1.0, 0.5)));
  CHECK(h.mid() == doctest::Approx(0.9135).epsilon(1e-3));
  CHECK(h.upper < base.lower);

  std::vector<double> hh = {0.5, 0.5};
  MassInterval h2 = shifted_mass(LatticeBasis::identity(2), hh, 1.0, 1e-12);
  CHECK(h2.mid() == doctest::Approx(h.mid() * h.mid()).epsilon(1e-11));
}

TEST_CASE("sum over a primitive sublattice and its quotient dominates") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    LatticeBasis b = oracle::exact_basis(oracle::random_int_basis(rng, 3));
    IntMatrix c(1, 3);
    std::uniform_int_distribution<int> d(-2, 2);
    do {
      for (int j = 0; j < 3; ++j) c(0, j) = d(rng);
    } while (c(0, 0) == 0 && c(0, 1) == 0 && c(0, 2) == 0);
    auto sub = saturate(b, make_witness(b, c));
    LatticeBasis l1 = sublattice_basis(b, sub);
    LatticeBasis q = project_orthogonal(b, sub);
    for (double s : {0.7, 1.5}) {
      MassInterval whole = gaussian_mass(b, s, 1e-10);
      MassInterval parts = gaussian_mass(l1, s, 1e-10);
      MassInterval quot = gaussian_mass(q, s, 1e-10);
      CHECK(whole.lower <= parts.upper * quot.upper);
    }
  }
}

TEST_CASE("smoothing parameter") {
  SmoothingResult z = smoothing_parameter(LatticeBasis::identity(1), 1.5, 1e-8);
  // scalar root of theta_1d(1/t) = 3/2 by bisection on the direct sum
  double lo = 0.3, hi = 2;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    (oracle::theta_1d(1 / mid) > 1.5 ? lo : hi) = mid;
  }
  CHECK(z.lo <= lo + 1e-12);
  CHECK(z.hi >= lo - 1e-12);
  CHECK(z.eta_star == doctest::Approx(0.6681).epsilon(1e-3));

  SmoothingResult big = smoothing_parameter(LatticeBasis::identity(256), 1.5, 1e-4);
  const double trend = std::sqrt(std::log(256.0) / oracle::pi);
  CHECK(std::abs(big.eta_star - trend) <= 0.25 * trend);

  SmoothingResult z2 = smoothing_parameter(LatticeBasis::identity(2), 1.5, 1e-7);
  SmoothingResult z2x2 = smoothing_parameter(scaled(LatticeBasis::identity(2), Rational(2)), 1.5, 1e-7);
  CHECK(z2x2.eta_star == doctest::Approx(z2.eta_star / 2).epsilon(1e-6));
}

TEST_CASE("Laplacian of the mass") {
  LatticeBasis z2 = LatticeBasis::identity(2);
  RealInterval pos = mass_laplacian(z2, std::sqrt(oracle::pi / 2));
  CHECK(pos.lower > 0);
  RealInterval tiny = mass_laplacian(z2, 0.05);
  CHECK(std::abs(tiny.upper) < 1e-100);

  LatticeBasis z3 = LatticeBasis::identity(3);
  RealInterval v = mass_laplacian(z3, 0.8);
  const double fd = fd_laplacian(z3, 0.8, 1e-3);
  CHECK(std::abs(v.mid() - fd) <= 1e-4 * std::abs(v.mid()));
}
