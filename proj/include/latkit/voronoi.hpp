#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latkit/core.hpp"

namespace latkit {

/// Facet description of V(L) = {x : <y, x> <= |y|^2 / 2 for all y in L}.
struct VoronoiCell {
  std::vector<std::vector<double>> relevant;          // closed under negation
  std::vector<std::vector<std::int64_t>> coefficients;  // of each relevant vector
  std::vector<double> norm_sq;
  std::size_t dim = 0;
  bool complete = false;
};

inline constexpr std::size_t kVoronoiCap = 6;

/// Relevant vectors from the minimal representatives of the cosets of 2L:
/// a coset c contributes +-v when its minimum is attained by exactly +-v.
/// Throws DimensionCap above `cap`.
VoronoiCell relevant_vectors(const LatticeBasis& basis, std::size_t cap = kVoronoiCap);

bool in_voronoi(const VoronoiCell& cell, std::span<const double> x);

/// Minkowski functional of V(L): max over relevant y of 2<y, x>/|y|^2, at least 0.
double voronoi_norm(const VoronoiCell& cell, std::span<const double> x);

/// x minus a closest lattice vector, by the iterative slicer over the
/// relevant vectors.
std::vector<double> reduce_to_cell(const VoronoiCell& cell, std::vector<double> x);

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// gamma_s(V(L)): fraction of draws g (density exp(-pi |x|^2)) with s g in V(L).
/// Membership goes through the relevant vectors up to the cap, CVP above.
MonteCarloEstimate gamma_voronoi(const LatticeBasis& basis, double s, std::uint64_t samples,
                                 std::uint64_t seed);
MonteCarloEstimate gamma_voronoi(const VoronoiCell& cell, double s, std::uint64_t samples,
                                 std::uint64_t seed);

/// gamma_s(V(L) + y): fraction of draws with s g - y in V(L).
MonteCarloEstimate gamma_shifted(const VoronoiCell& cell, std::span<const double> y, double s,
                                 std::uint64_t samples, std::uint64_t seed);

/// gamma_s(A V(L)) for an n x n matrix A acting on column vectors.
MonteCarloEstimate gamma_transformed(const VoronoiCell& cell, const RealMatrix& a, double s,
                                     std::uint64_t samples, std::uint64_t seed);

/// |n M / tr M - I|_F for the second-moment matrix M of the draws landing in
/// V(L)/s. The error is taken from 32 batch means.
MonteCarloEstimate isotropy_defect(const LatticeBasis& basis, double s, std::uint64_t samples,
                                   std::uint64_t seed);

struct GradientReport {
  // gradients at A = I of:
  RealMatrix analytic;     // -2 pi E[1{g in tV} g g^T]
  RealMatrix fd_lattice;   // gamma_{1/t}(V(B A)) / |det A|, cell recomputed
  RealMatrix fd_cell;      // gamma_{1/t}(A V) / |det A|, fixed cell
  RealMatrix err_analytic, err_lattice, err_cell;  // one-sigma, FD bias included
  double max_dev_ab = 0, max_dev_ac = 0, max_dev_bc = 0;  // in units of combined error
  bool agree = false;  // every entry within 3 combined errors
  double t = 0;
  double fd_step = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Throws DimensionCap above n = 4. Common random numbers across all
/// perturbations; the FD bias is estimated by |D(h) - D(2h)| / 3.
GradientReport voronoi_mass_gradient_check(const LatticeBasis& basis, double t, std::uint64_t samples,
                                           std::uint64_t seed, double fd_step = 1e-2);

/// Directional central differences of both FD estimators along a matrix E.
struct DirectionalDerivative {
  MonteCarloEstimate lattice;
  MonteCarloEstimate cell;
};
DirectionalDerivative gradient_direction(const LatticeBasis& basis, double t, const RealMatrix& e,
                                         std::uint64_t samples, std::uint64_t seed, double fd_step = 1e-2);

/// mu-bar(L) = sqrt(E |x|^2) for x uniform on V(L), via uniform points of the
/// fundamental parallelepiped reduced into the cell. Delta-method error.
MonteCarloEstimate second_moment(const LatticeBasis& basis, std::uint64_t samples, std::uint64_t seed);

/// l_K(I) for K = det(L)^{-1/n} V(L): sqrt(E |g|_K^2) over draws g.
MonteCarloEstimate ell_norm(const LatticeBasis& basis, std::uint64_t samples, std::uint64_t seed);

struct CoveringRadius {
  double lower = 0;
  double upper = 0;
  bool exact = false;
};

/// Diagonal bases: closed form. n <= 4: maximum vertex norm of V(L). Above:
/// deep-hole search for the lower bound, (1/2) sqrt(sum |b*_i|^2) above.
CoveringRadius covering_radius(const LatticeBasis& basis, std::uint64_t seed = 1);

/// Vertices of V(L) (n <= 4), deduplicated on a 1e-9 grid.
std::vector<std::vector<double>> voronoi_vertices(const VoronoiCell& cell);

}  // namespace latkit
