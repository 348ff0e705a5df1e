#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "latkit/core.hpp"

namespace latkit {

/// Certified enclosure of rho_s(L) (or of a shifted mass).
///
/// Near 1 the interesting information is in the excess value - 1, which can
/// be far below double resolution (e.g. 1e-137), so the natural logs of the
/// lower and upper excess are carried alongside the plain endpoints.
struct MassInterval {
  double lower = 1;
  double upper = 1;
  double log_lower_excess = -INFINITY;  // log(lower - 1)
  double log_upper_excess = -INFINITY;  // log(upper - 1)
  double s = 1;
  double truncation_radius = 0;
  std::uint64_t terms = 0;

  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

struct MassOptions {
  /// Refuse enumerations whose predicted point count exceeds this.
  double budget = 5e7;
  /// Allow evaluation through the dual lattice and Poisson summation.
  bool allow_dual = true;
  /// Multiply over mutually orthogonal blocks of the basis.
  bool split_blocks = true;
  /// Optional bound on log(upper - lower); needed when the excess itself is
  /// astronomically small.
  std::optional<double> log_abs_width;
};

/// Enclosure of rho_s(L) with upper - lower <= eps * lower.
/// Throws BudgetExceeded (carrying the best interval) when eps is out of reach.
MassInterval gaussian_mass(const LatticeBasis& basis, double s, double eps = 1e-9,
                           const MassOptions& opts = {});

/// Enclosure of rho_s(L - u).
MassInterval shifted_mass(const LatticeBasis& basis, std::span<const double> u, double s,
                          double eps = 1e-9, const MassOptions& opts = {});

struct PsfResidual {
  double residual = 0;   // |rho_s(L) - s^n/det * rho_{1/s}(L*)| / rho_s(L)
  double tolerance = 0;  // combined relative width of the two enclosures
  MassInterval primal;
  MassInterval dual;
};

/// Both sides are summed directly (no dual shortcut).
PsfResidual psf_residual(const LatticeBasis& basis, double s, double eps = 1e-12);

struct SmoothingResult {
  double eta_star = 0;
  double lo = 0;  // rho_{1/lo}(L) >= target, certified
  double hi = 0;  // rho_{1/hi}(L) <= target, certified
  double target = 1.5;
};

SmoothingResult smoothing_parameter(const LatticeBasis& basis, double target = 1.5,
                                    double tol = 1e-6);

struct RealInterval {
  double lower = 0;
  double upper = 0;
  double mid() const { return 0.5 * (lower + upper); }
};

/// Laplacian of A -> rho_s(e^{A/2} L) over trace-zero symmetric A, at A = 0:
///   (pi/s^2) (n-1)/n sum_y rho_s(y) |y|^2 (pi |y|^2 / s^2 - (n+2)/2).
/// The interval width is at most eps times the sum of absolute terms.
RealInterval mass_laplacian(const LatticeBasis& basis, double s, double eps = 1e-12,
                            double budget = 5e7);

/// Radius multiplier r (>= 1/sqrt(2 pi)) for which the tail factor
/// (sqrt(2 pi e r^2) exp(-pi r^2))^n has natural log <= log_q.
double banaszczyk_radius(std::size_t n, double log_q);
double banaszczyk_log_factor(std::size_t n, double r);

}  // namespace latkit
