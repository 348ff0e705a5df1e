#include "latkit/voronoi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "latkit/enumerate.hpp"
#include "latkit/random.hpp"

namespace latkit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFacetSlack = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

// Proportion estimate with the sample standard error.
MonteCarloEstimate proportion(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
  MonteCarloEstimate e;
  e.samples = n;
  e.seed = seed;
  if (n == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.mean = p;
  e.std_error = n > 1 ? std::sqrt(p * (1 - p) / static_cast<double>(n - 1)) : 0.0;
  return e;
}

struct Moments {
  double sum = 0, sum_sq = 0;
  Moments& operator+=(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    return *this;
  }
};

MonteCarloEstimate from_moments(const Moments& m, std::uint64_t n, std::uint64_t seed) {
  MonteCarloEstimate e;
  e.samples = n;
  e.seed = seed;
  const double nn = static_cast<double>(n);
  e.mean = m.sum / nn;
  const double var = std::max(0.0, m.sum_sq / nn - e.mean * e.mean);
  e.std_error = n > 1 ? std::sqrt(var / (nn - 1)) : 0.0;
  return e;
}

// sqrt of a mean, error by the delta method
MonteCarloEstimate root_of(MonteCarloEstimate m) {
  const double r = std::sqrt(std::max(0.0, m.mean));
  m.std_error = r > 0 ? m.std_error / (2 * r) : 0.0;
  m.mean = r;
  return m;
}

bool in_cell_by_cvp(const LatticeBasis& basis, std::span<const double> x) {
  return closest_vector(basis, x).norm >= std::sqrt(norm_sq(x)) * (1 - 1e-12);
}

void check_cap(const LatticeBasis& basis, std::size_t cap) {
  if (!basis.full_rank()) throw InvalidInput("Voronoi computations need a full-rank basis");
  if (basis.rank() > cap) throw DimensionCap("rank " + std::to_string(basis.rank()) + " exceeds the cap " + std::to_string(cap));
}

RealMatrix identity_plus(std::size_t n, const RealMatrix& e, double h) {
  RealMatrix a = RealMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) += h * e(i, j);
  return a;
}

Eigen::MatrixXd to_eigen(const RealMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// A perturbation I + hE, seen both ways: through the lattice B(I + hE) with
// its own cell, and as the fixed cell mapped by I + hE on column vectors.
struct Perturbed {
  VoronoiCell lattice_cell;
  Eigen::MatrixXd inverse;  // of I + hE
  double inv_det = 1;       // 1 / |det(I + hE)|
};

Perturbed perturb(const LatticeBasis& basis, const RealMatrix& e, double h) {
  const std::size_t n = basis.rank();
  RealMatrix a = identity_plus(n, e, h);
  Perturbed p;
  p.lattice_cell = relevant_vectors(transformed(basis, a), 4);
  Eigen::MatrixXd ea = to_eigen(a);
  p.inverse = ea.inverse();
  p.inv_det = 1 / std::abs(ea.determinant());
  return p;
}

}  // namespace

VoronoiCell relevant_vectors(const LatticeBasis& basis, std::size_t cap) {
  check_cap(basis, cap);
  const std::size_t n = basis.rank();
  VoronoiCell cell;
  cell.dim = n;
  Enumerator twice(basis.is_exact() ? scaled(basis, Rational(2)) : scaled(basis, 2.0));
  const RealMatrix& b = basis.rows();

  auto coords_of = [&](const std::vector<std::int64_t>& q) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (q[i] != 0)
        for (std::size_t j = 0; j < n; ++j) v[j] += static_cast<double>(q[i]) * b(i, j);
    return v;
  };
  auto exact_norm = [&](const std::vector<std::int64_t>& q) {
    const RatMatrix& g = basis.exact_gram();
    Rational s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (q[i] != 0 && q[j] != 0) s += Rational(static_cast<long>(q[i] * q[j])) * g(i, j);
    return s;
  };

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::int64_t> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = (mask >> i) & 1u;
    const std::vector<double> target = coords_of(c);
    // minimal representatives of c + 2L are c - w for w in 2L closest to c
    std::vector<std::int64_t> start = twice.babai(target);
    double bound = norm_sq(target);
    {
      std::vector<double> w = twice.coordinates(start);
      double d = 0;
      for (std::size_t j = 0; j < n; ++j) d += (target[j] - w[j]) * (target[j] - w[j]);
      bound = std::min(bound, d);
    }
    double best = bound;
    bound *= 1 + 1e-8;
    std::vector<std::pair<std::vector<std::int64_t>, double>> found;
    twice.for_each(target, &bound, [&](std::span<const std::int64_t> x, double d2) {
      if (d2 < best) {
        best = d2;
        bound = d2 * (1 + 1e-8);
      }
      found.emplace_back(twice.input_coefficients(x), d2);
    });
    std::vector<std::vector<std::int64_t>> minimal;
    for (auto& [x, d2] : found) {
      if (d2 > best * (1 + 1e-8)) continue;
      std::vector<std::int64_t> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = c[i] - 2 * x[i];
      minimal.push_back(std::move(q));
    }
    if (basis.is_exact() && minimal.size() > 1) {
      // near-ties are decided exactly
      std::vector<Rational> norms;
      for (auto& q : minimal) norms.push_back(exact_norm(q));
      const Rational lo = *std::min_element(norms.begin(), norms.end());
      std::vector<std::vector<std::int64_t>> keep;
      for (std::size_t k = 0; k < minimal.size(); ++k)
        if (norms[k] == lo) keep.push_back(minimal[k]);
      minimal = std::move(keep);
    }
    if (minimal.size() != 2) continue;
    std::vector<std::int64_t> q = std::max(minimal[0], minimal[1]);
    std::vector<std::int64_t> neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -q[i];
    for (auto* v : {&q, &neg}) {
      cell.relevant.push_back(coords_of(*v));
      cell.norm_sq.push_back(norm_sq(cell.relevant.back()));
      cell.coefficients.push_back(*v);
    }
  }
  cell.complete = true;
  return cell;
}

bool in_voronoi(const VoronoiCell& cell, std::span<const double> x) {
  for (std::size_t k = 0; k < cell.relevant.size(); ++k)
    if (dot(cell.relevant[k], x) > cell.norm_sq[k] * (0.5 + kFacetSlack)) return false;
  return true;
}

double voronoi_norm(const VoronoiCell& cell, std::span<const double> x) {
  double v = 0;
  for (std::size_t k = 0; k < cell.relevant.size(); ++k) v = std::max(v, 2 * dot(cell.relevant[k], x) / cell.norm_sq[k]);
  return v;
}

std::vector<double> reduce_to_cell(const VoronoiCell& cell, std::vector<double> x) {
  for (int iter = 0; iter < 100000; ++iter) {
    // the relevant vector that shortens x the most
    std::size_t pick = cell.relevant.size();
    double gain = 0;
    for (std::size_t k = 0; k < cell.relevant.size(); ++k) {
      const double g = 2 * dot(cell.relevant[k], x) - cell.norm_sq[k];
      if (g > gain + kFacetSlack * cell.norm_sq[k]) {
        gain = g;
        pick = k;
      }
    }
    if (pick == cell.relevant.size()) return x;
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= cell.relevant[pick][j];
  }
  throw LatkitError("iterative slicer did not converge");
}

MonteCarloEstimate gamma_voronoi(const VoronoiCell& cell, double s, std::uint64_t samples, std::uint64_t seed) {
  CounterRng rng(seed);
  auto parts = chunked<std::uint64_t>(samples, [&](std::uint64_t b, std::uint64_t e) {
    std::vector<double> g(cell.dim);
    std::uint64_t hits = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      for (double& v : g) v *= s;
      hits += in_voronoi(cell, g);
    }
    return hits;
  });
  std::uint64_t hits = 0;
  for (auto h : parts) hits += h;
  return proportion(hits, samples, seed);
}

MonteCarloEstimate gamma_voronoi(const LatticeBasis& basis, double s, std::uint64_t samples, std::uint64_t seed) {
  if (basis.rank() <= kVoronoiCap) return gamma_voronoi(relevant_vectors(basis), s, samples, seed);
  if (!basis.full_rank()) throw InvalidInput("Voronoi computations need a full-rank basis");
  CounterRng rng(seed);
  auto parts = chunked<std::uint64_t>(samples, [&](std::uint64_t b, std::uint64_t e) {
    std::vector<double> g(basis.rank());
    std::uint64_t hits = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      for (double& v : g) v *= s;
      hits += in_cell_by_cvp(basis, g);
    }
    return hits;
  });
  std::uint64_t hits = 0;
  for (auto h : parts) hits += h;
  return proportion(hits, samples, seed);
}

MonteCarloEstimate gamma_shifted(const VoronoiCell& cell, std::span<const double> y, double s,
                                 std::uint64_t samples, std::uint64_t seed) {
  CounterRng rng(seed);
  auto parts = chunked<std::uint64_t>(samples, [&](std::uint64_t b, std::uint64_t e) {
    std::vector<double> g(cell.dim);
    std::uint64_t hits = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = s * g[j] - y[j];
      hits += in_voronoi(cell, g);
    }
    return hits;
  });
  std::uint64_t hits = 0;
  for (auto h : parts) hits += h;
  return proportion(hits, samples, seed);
}

MonteCarloEstimate gamma_transformed(const VoronoiCell& cell, const RealMatrix& a, double s,
                                     std::uint64_t samples, std::uint64_t seed) {
  const Eigen::MatrixXd inv = to_eigen(a).inverse();
  CounterRng rng(seed);
  auto parts = chunked<std::uint64_t>(samples, [&](std::uint64_t b, std::uint64_t e) {
    const std::size_t n = cell.dim;
    std::vector<double> g(n), x(n);
    std::uint64_t hits = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      for (std::size_t r = 0; r < n; ++r) {
        x[r] = 0;
        for (std::size_t c = 0; c < n; ++c) x[r] += inv(r, c) * s * g[c];
      }
      hits += in_voronoi(cell, x);
    }
    return hits;
  });
  std::uint64_t hits = 0;
  for (auto h : parts) hits += h;
  return proportion(hits, samples, seed);
}

MonteCarloEstimate isotropy_defect(const LatticeBasis& basis, double s, std::uint64_t samples, std::uint64_t seed) {
  const VoronoiCell cell = relevant_vectors(basis);
  const std::size_t n = cell.dim;
  constexpr unsigned kBatches = 32;
  CounterRng rng(seed);
  auto batches = chunked<std::vector<double>>(
      samples,
      [&](std::uint64_t b, std::uint64_t e) {
        std::vector<double> m(n * n, 0.0), g(n);
        for (std::uint64_t i = b; i < e; ++i) {
          rng.gaussian(i, g);
          std::vector<double> x = g;
          for (double& v : x) v *= s;
          if (!in_voronoi(cell, x)) continue;
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) m[r * n + c] += g[r] * g[c];
        }
        return m;
      },
      kBatches);
  auto normalized = [&](const std::vector<double>& m) {
    double tr = 0;
    for (std::size_t r = 0; r < n; ++r) tr += m[r * n + r];
    std::vector<double> out(n * n, 0.0);
    if (tr > 0)
      for (std::size_t k = 0; k < n * n; ++k) out[k] = static_cast<double>(n) * m[k] / tr;
    return out;
  };
  std::vector<double> total(n * n, 0.0);
  for (const auto& m : batches)
    for (std::size_t k = 0; k < n * n; ++k) total[k] += m[k];
  const std::vector<double> mean = normalized(total);
  double defect = 0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double d = mean[r * n + c] - (r == c ? 1.0 : 0.0);
      defect += d * d;
    }
  // per-entry spread of the batch estimates
  const double nb = static_cast<double>(batches.size());
  std::vector<double> var(n * n, 0.0);
  for (const auto& m : batches) {
    const std::vector<double> bm = normalized(m);
    for (std::size_t k = 0; k < n * n; ++k) var[k] += (bm[k] - mean[k]) * (bm[k] - mean[k]);
  }
  double se2 = 0;
  for (double v : var) se2 += nb > 1 ? v / (nb - 1) / nb : 0.0;
  MonteCarloEstimate e;
  e.mean = std::sqrt(defect);
  e.std_error = std::sqrt(se2);
  e.samples = samples;
  e.seed = seed;
  return e;
}

namespace {

// Sums for one FD estimator at steps h and 2h, per matrix entry.
struct FdSums {
  std::vector<Moments> h, h2;
};

struct GradientSums {
  std::vector<Moments> analytic;
  FdSums lattice, cell;
};

}  // namespace

GradientReport voronoi_mass_gradient_check(const LatticeBasis& basis, double t, std::uint64_t samples,
                                           std::uint64_t seed, double fd_step) {
  check_cap(basis, 4);
  const std::size_t n = basis.rank();
  const std::size_t nn = n * n;
  const VoronoiCell base = relevant_vectors(basis, 4);
  // perturbations per entry: +h, -h, +2h, -2h
  std::vector<std::array<Perturbed, 4>> pert(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    RealMatrix e(n, n);
    e(k / n, k % n) = 1;
    const double steps[4] = {fd_step, -fd_step, 2 * fd_step, -2 * fd_step};
    for (int s = 0; s < 4; ++s) pert[k][s] = perturb(basis, e, steps[s]);
  }
  CounterRng rng(seed);
  auto parts = chunked<GradientSums>(samples, [&](std::uint64_t b, std::uint64_t e) {
    GradientSums acc;
    acc.analytic.resize(nn);
    for (FdSums* f : {&acc.lattice, &acc.cell}) {
      f->h.resize(nn);
      f->h2.resize(nn);
    }
    std::vector<double> g(n), x(n), y(n);
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      for (std::size_t j = 0; j < n; ++j) x[j] = g[j] / t;
      const bool hit = in_voronoi(base, x);
      for (std::size_t k = 0; k < nn; ++k) {
        const double a = hit ? -2 * kPi * g[k / n] * g[k % n] : 0.0;
        acc.analytic[k].sum += a;
        acc.analytic[k].sum_sq += a * a;
        double lat[4], cel[4];
        for (int s = 0; s < 4; ++s) {
          const Perturbed& p = pert[k][s];
          lat[s] = in_voronoi(p.lattice_cell, x) ? p.inv_det : 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            y[r] = 0;
            for (std::size_t c = 0; c < n; ++c) y[r] += p.inverse(r, c) * x[c];
          }
          cel[s] = in_voronoi(base, y) ? p.inv_det : 0.0;
        }
        const double dl1 = (lat[0] - lat[1]) / (2 * fd_step), dl2 = (lat[2] - lat[3]) / (4 * fd_step);
        const double dc1 = (cel[0] - cel[1]) / (2 * fd_step), dc2 = (cel[2] - cel[3]) / (4 * fd_step);
        acc.lattice.h[k] += {dl1, dl1 * dl1};
        acc.lattice.h2[k] += {dl2, dl2 * dl2};
        acc.cell.h[k] += {dc1, dc1 * dc1};
        acc.cell.h2[k] += {dc2, dc2 * dc2};
      }
    }
    return acc;
  });
  GradientSums tot;
  tot.analytic.resize(nn);
  for (FdSums* f : {&tot.lattice, &tot.cell}) {
    f->h.resize(nn);
    f->h2.resize(nn);
  }
  for (const auto& p : parts)
    for (std::size_t k = 0; k < nn; ++k) {
      tot.analytic[k] += p.analytic[k];
      tot.lattice.h[k] += p.lattice.h[k];
      tot.lattice.h2[k] += p.lattice.h2[k];
      tot.cell.h[k] += p.cell.h[k];
      tot.cell.h2[k] += p.cell.h2[k];
    }

  GradientReport r;
  r.t = t;
  r.fd_step = fd_step;
  r.samples = samples;
  r.seed = seed;
  for (RealMatrix* m : {&r.analytic, &r.fd_lattice, &r.fd_cell, &r.err_analytic, &r.err_lattice, &r.err_cell})
    *m = RealMatrix(n, n);
  for (std::size_t k = 0; k < nn; ++k) {
    const std::size_t i = k / n, j = k % n;
    MonteCarloEstimate a = from_moments(tot.analytic[k], samples, seed);
    r.analytic(i, j) = a.mean;
    r.err_analytic(i, j) = a.std_error;
    auto fd = [&](const FdSums& f, RealMatrix& value, RealMatrix& err) {
      MonteCarloEstimate d1 = from_moments(f.h[k], samples, seed), d2 = from_moments(f.h2[k], samples, seed);
      const double bias = std::abs(d1.mean - d2.mean) / 3;
      value(i, j) = d1.mean;
      err(i, j) = std::sqrt(d1.std_error * d1.std_error + bias * bias);
    };
    fd(tot.lattice, r.fd_lattice, r.err_lattice);
    fd(tot.cell, r.fd_cell, r.err_cell);
  }
  auto deviation = [&](const RealMatrix& x, const RealMatrix& ex, const RealMatrix& y, const RealMatrix& ey) {
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = std::abs(x(i, j) - y(i, j));
        const double err = std::hypot(ex(i, j), ey(i, j));
        worst = std::max(worst, err > 0 ? diff / err : (diff > 0 ? INFINITY : 0.0));
      }
    return worst;
  };
  r.max_dev_ab = deviation(r.analytic, r.err_analytic, r.fd_lattice, r.err_lattice);
  r.max_dev_ac = deviation(r.analytic, r.err_analytic, r.fd_cell, r.err_cell);
  r.max_dev_bc = deviation(r.fd_lattice, r.err_lattice, r.fd_cell, r.err_cell);
  r.agree = r.max_dev_ab <= 3 && r.max_dev_ac <= 3 && r.max_dev_bc <= 3;
  return r;
}

DirectionalDerivative gradient_direction(const LatticeBasis& basis, double t, const RealMatrix& e,
                                         std::uint64_t samples, std::uint64_t seed, double fd_step) {
  check_cap(basis, 4);
  const std::size_t n = basis.rank();
  const VoronoiCell base = relevant_vectors(basis, 4);
  const Perturbed plus = perturb(basis, e, fd_step), minus = perturb(basis, e, -fd_step);
  CounterRng rng(seed);
  auto parts = chunked<std::array<Moments, 2>>(samples, [&](std::uint64_t b, std::uint64_t end) {
    std::array<Moments, 2> acc{};
    std::vector<double> g(n), x(n), y(n);
    for (std::uint64_t i = b; i < end; ++i) {
      rng.gaussian(i, g);
      for (std::size_t j = 0; j < n; ++j) x[j] = g[j] / t;
      double lat[2], cel[2];
      int s = 0;
      for (const Perturbed* p : {&plus, &minus}) {
        lat[s] = in_voronoi(p->lattice_cell, x) ? p->inv_det : 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          y[r] = 0;
          for (std::size_t c = 0; c < n; ++c) y[r] += p->inverse(r, c) * x[c];
        }
        cel[s] = in_voronoi(base, y) ? p->inv_det : 0.0;
        ++s;
      }
      const double dl = (lat[0] - lat[1]) / (2 * fd_step), dc = (cel[0] - cel[1]) / (2 * fd_step);
      acc[0] += {dl, dl * dl};
      acc[1] += {dc, dc * dc};
    }
    return acc;
  });
  std::array<Moments, 2> tot{};
  for (const auto& p : parts) {
    tot[0] += p[0];
    tot[1] += p[1];
  }
  return {from_moments(tot[0], samples, seed), from_moments(tot[1], samples, seed)};
}

MonteCarloEstimate second_moment(const LatticeBasis& basis, std::uint64_t samples, std::uint64_t seed) {
  if (!basis.full_rank()) throw InvalidInput("Voronoi computations need a full-rank basis");
  const std::size_t n = basis.rank();
  const bool use_cell = n <= kVoronoiCap;
  VoronoiCell cell;
  if (use_cell) cell = relevant_vectors(basis);
  // start from an LLL basis so parallelepiped points are already near the cell
  const LatticeBasis red = lll_reduce(to_float(basis)).basis;
  CounterRng rng(seed);
  auto parts = chunked<Moments>(samples, [&](std::uint64_t b, std::uint64_t e) {
    Moments m;
    std::vector<double> x(n);
    for (std::uint64_t i = b; i < e; ++i) {
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const double u = rng.uniform(i, k) - 0.5;
        for (std::size_t j = 0; j < n; ++j) x[j] += u * red.rows()(k, j);
      }
      double d2;
      if (use_cell) {
        d2 = norm_sq(reduce_to_cell(cell, x));
      } else {
        const double d = closest_vector(basis, x).norm;
        d2 = d * d;
      }
      m.sum += d2;
      m.sum_sq += d2 * d2;
    }
    return m;
  });
  Moments tot;
  for (const auto& p : parts) tot += p;
  return root_of(from_moments(tot, samples, seed));
}

MonteCarloEstimate ell_norm(const LatticeBasis& basis, std::uint64_t samples, std::uint64_t seed) {
  const VoronoiCell cell = relevant_vectors(basis);
  const double scale = std::exp(basis.log_det() / static_cast<double>(basis.rank()));
  CounterRng rng(seed);
  auto parts = chunked<Moments>(samples, [&](std::uint64_t b, std::uint64_t e) {
    Moments m;
    std::vector<double> g(cell.dim);
    for (std::uint64_t i = b; i < e; ++i) {
      rng.gaussian(i, g);
      const double v = scale * voronoi_norm(cell, g);
      m.sum += v * v;
      m.sum_sq += v * v * v * v;
    }
    return m;
  });
  Moments tot;
  for (const auto& p : parts) tot += p;
  return root_of(from_moments(tot, samples, seed));
}

std::vector<std::vector<double>> voronoi_vertices(const VoronoiCell& cell) {
  const std::size_t n = cell.dim;
  if (n > 4) throw DimensionCap("vertex enumeration is limited to rank 4");
  const std::size_t m = cell.relevant.size();
  std::set<std::vector<long long>> seen;
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(n);
  // all n-subsets of facets; a vertex is a feasible point where n of them are tight
  auto visit = [&](auto&& self, std::size_t depth, std::size_t start) -> void {
    if (depth == n) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd rhs(n);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) a(r, c) = cell.relevant[idx[r]][c];
        rhs(r) = cell.norm_sq[idx[r]] / 2;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(rhs);
      std::vector<double> v(x.data(), x.data() + n);
      for (std::size_t k = 0; k < m; ++k)
        if (dot(cell.relevant[k], v) > cell.norm_sq[k] * (0.5 + 1e-9)) return;
      std::vector<long long> key(n);
      for (std::size_t c = 0; c < n; ++c) key[c] = std::llround(v[c] * 1e9);
      if (seen.insert(key).second) out.push_back(std::move(v));
      return;
    }
    for (std::size_t i = start; i + (n - depth) <= m; ++i) {
      idx[depth] = i;
      self(self, depth + 1, i + 1);
    }
  };
  visit(visit, 0, 0);
  return out;
}

CoveringRadius covering_radius(const LatticeBasis& basis, std::uint64_t seed) {
  if (!basis.full_rank()) throw InvalidInput("covering radius needs a full-rank basis");
  const std::size_t n = basis.rank();
  CoveringRadius c;
  if (basis.is_diagonal()) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += basis.rows()(i, i) * basis.rows()(i, i);
    c.lower = c.upper = 0.5 * std::sqrt(s);
    c.exact = true;
    return c;
  }
  if (n <= 4) {
    double best = 0;
    for (const auto& v : voronoi_vertices(relevant_vectors(basis))) best = std::max(best, norm_sq(v));
    c.lower = c.upper = std::sqrt(best);
    c.exact = true;
    return c;
  }
  const LatticeBasis red = lll_reduce(to_float(basis)).basis;
  const Gso gso = gram_schmidt(red.rows());
  double s = 0;
  for (double b : gso.bstar_sq) s += b;
  c.upper = 0.5 * std::sqrt(s);
  // deep-hole search: random targets in the parallelepiped
  CounterRng rng(seed);
  std::vector<double> x(n);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform(i, k);
      for (std::size_t j = 0; j < n; ++j) x[j] += u * red.rows()(k, j);
    }
    c.lower = std::max(c.lower, closest_vector(basis, x).norm);
  }
  c.lower = std::min(c.lower, c.upper);
  return c;
}

}  // namespace latkit
