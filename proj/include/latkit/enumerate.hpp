#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "latkit/core.hpp"

namespace latkit {

struct BallQuery {
  double radius = 1.0;
  std::vector<double> center;  // empty means the origin
  std::size_t max_points = 10'000'000;
  /// Refuse queries whose predicted point count exceeds this.
  double budget = 1e8;
};

struct LatticePoint {
  std::vector<std::int64_t> coefficients;  // in the input basis
  std::vector<double> coordinates;
  double dist_sq = 0;  // squared distance to the query center
};

struct EnumerationResult {
  std::vector<LatticePoint> points;  // sorted by coefficient vector
  bool complete = true;
};

/// All lattice points y with ||y - center|| <= radius.
EnumerationResult points_in_ball(const LatticeBasis& basis, const BallQuery& query);

/// Number of lattice points in the closed ball; the innermost level is
/// counted arithmetically, so very elongated lattices stay cheap.
std::uint64_t count_points_in_ball(const LatticeBasis& basis, double radius,
                                   std::span<const double> center = {});

struct LatticeVector {
  std::vector<std::int64_t> coefficients;
  std::vector<double> coordinates;
  double norm = 0;  // length, or distance to the target for closest_vector
};

LatticeVector shortest_vector(const LatticeBasis& basis);
LatticeVector closest_vector(const LatticeBasis& basis, std::span<const double> target);

/// Depth-first enumeration over an LLL-reduced copy of a basis. Points are
/// visited through their coefficients in the reduced basis; callers map them
/// back with input_coefficients().
class Enumerator {
 public:
  explicit Enumerator(const LatticeBasis& basis);

  const LatticeBasis& input() const { return input_; }
  const LatticeBasis& reduced() const { return reduced_; }
  const Gso& gso() const { return gso_; }
  std::size_t rank() const { return gso_.bstar_sq.size(); }

  /// Ball volume over covolume, the heuristic point count.
  double predicted_count(double radius) const;

  std::vector<std::int64_t> input_coefficients(std::span<const std::int64_t> reduced) const;
  std::vector<double> coordinates(std::span<const std::int64_t> reduced) const;

  /// Calls visit(x, dist_sq) for every reduced-coefficient vector x whose point
  /// lies within sqrt(*bound_sq) of center (relative slack 1e-9). The visitor
  /// may shrink *bound_sq to prune the rest of the search.
  template <class Visit>
  void for_each(std::span<const double> center, double* bound_sq, Visit&& visit) const;

  std::uint64_t count(std::span<const double> center, double radius_sq) const;

  /// Kahan-compensated sum of exp(-pi ||y||^2 / s^2) over ||y|| <= radius,
  /// visited in deterministic order; also returns the number of terms.
  std::pair<double, std::uint64_t> gaussian_sum(double s, double radius) const;

  /// Like gaussian_sum but over y - center.
  std::pair<double, std::uint64_t> shifted_gaussian_sum(std::span<const double> center, double s,
                                                        double radius) const;

  /// Babai nearest-plane coefficients (reduced basis) for a target.
  std::vector<std::int64_t> babai(std::span<const double> target) const;

 private:
  struct Frame {
    std::vector<double> tau;  // center in Gram-Schmidt coordinates
    double perp_sq = 0;       // squared distance of center to span(L)
  };
  Frame project(std::span<const double> center) const;

  template <class Visit>
  void recurse(std::size_t level, double partial, const Frame& f, std::vector<std::int64_t>& x,
               double* bound_sq, Visit& visit) const;

  LatticeBasis input_;
  LatticeBasis reduced_;
  std::vector<std::vector<std::int64_t>> transform_;  // reduced = transform * input
  Gso gso_;
  double log_covolume_ = 0;
};

inline constexpr double kEnumSlack = 1e-9;

template <class Visit>
void Enumerator::for_each(std::span<const double> center, double* bound_sq, Visit&& visit) const {
  Frame f = project(center);
  std::vector<std::int64_t> x(rank(), 0);
  if (rank() == 0) return;
  recurse(rank() - 1, f.perp_sq, f, x, bound_sq, visit);
}

template <class Visit>
void Enumerator::recurse(std::size_t level, double partial, const Frame& f,
                         std::vector<std::int64_t>& x, double* bound_sq, Visit& visit) const {
  double c = f.tau[level];
  for (std::size_t i = level + 1; i < rank(); ++i) c -= static_cast<double>(x[i]) * gso_.mu(i, level);
  const double bs = gso_.bstar_sq[level];
  const double start = std::round(c);
  // upward from the nearest integer, then downward
  for (int dir : {+1, -1}) {
    for (double xi = dir > 0 ? start : start - 1;; xi += dir) {
      const double dev = xi - c;
      const double p = partial + dev * dev * bs;
      if (p > *bound_sq * (1 + kEnumSlack)) break;
      x[level] = static_cast<std::int64_t>(xi);
      if (level == 0) {
        visit(std::span<const std::int64_t>(x), p);
      } else {
        recurse(level - 1, p, f, x, bound_sq, visit);
      }
    }
  }
  x[level] = 0;
}

}  // namespace latkit
