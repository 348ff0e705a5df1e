#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "latkit/core.hpp"

namespace latkit {

/// Search policy for densest sublattices.
///
/// Certification rule: if M is a densest rank-k sublattice, vectors attaining
/// its successive minima have norms at most R_k = gamma_k^{k/2} D / lambda_1^{k-1}
/// (Minkowski's second theorem, D the best determinant found so far), and M is
/// the saturation of their span. The search enumerates every k-tuple of lattice
/// vectors inside R_k whose norm product is at most gamma_k^{k/2} D, so a
/// completed search is exact. radius_slack only widens the enumeration radius.
struct SearchOptions {
  /// Maximum number of candidate tuples examined per rank.
  std::uint64_t budget = 20'000'000;
  double radius_slack = 1.0;
  /// Use the dual lattice when the complementary rank is smaller.
  bool use_duality = true;
};

struct DensestResult {
  SublatticeWitness witness;  // primitive, coefficients in HNF
  bool certified = false;
  double search_radius = 0;
  std::uint64_t candidates = 0;
};

DensestResult densest_sublattice(const LatticeBasis& basis, std::size_t k, const SearchOptions& opts = {});

struct CanonicalPlot {
  /// Index k = 0..d: min log det over rank-k sublattices and its witness.
  std::vector<double> min_log_det;
  std::vector<SublatticeWitness> witness;
  std::vector<bool> certified;
  bool all_certified() const;
};

CanonicalPlot canonical_plot(const LatticeBasis& basis, const SearchOptions& opts = {});

struct FiltrationChain {
  std::vector<SublatticeWitness> chain;  // {0} = L_0 ... L_k = L
  std::vector<double> scales;            // alpha_i = det(L_i/L_{i-1})^{-1/rank}
  std::vector<double> slopes;            // log det(L_i/L_{i-1}) / rank
  bool nested = true;
  bool certified = true;
};

/// Ranks whose plot points are strict vertices of the lower convex hull.
/// Exact bases decide vertices by comparing rational powers of Gram
/// determinants; float bases compare slopes with a 1e-10 tolerance.
std::vector<std::size_t> hull_vertices(const LatticeBasis& basis, const CanonicalPlot& plot);

FiltrationChain canonical_filtration(const LatticeBasis& basis, const SearchOptions& opts = {});
FiltrationChain canonical_filtration(const LatticeBasis& basis, const CanonicalPlot& plot);

/// alpha_i (L_i / L_{i-1}) for 1 <= i < chain.size(). Exact when alpha_i is
/// rational, float otherwise.
LatticeBasis filtration_quotient(const LatticeBasis& basis, const FiltrationChain& f, std::size_t i);

struct StabilityCertificate {
  bool stable = false;
  std::optional<SublatticeWitness> failing_witness;
  bool det_one_check = false;
  bool search_certified = false;
};

StabilityCertificate is_stable(const LatticeBasis& basis, const SearchOptions& opts = {});
StabilityCertificate is_stable(const LatticeBasis& basis, const CanonicalPlot& plot);

/// Whether every sublattice has determinant >= 1 (plot minimum >= 0 at every
/// rank, exact in exact mode).
bool all_sublattices_at_least_one(const LatticeBasis& basis, const CanonicalPlot& plot);

struct CertifiedValue {
  double value = 0;
  bool certified = false;
};

CertifiedValue eta_det(const LatticeBasis& basis, const SearchOptions& opts = {});
CertifiedValue eta_det(const CanonicalPlot& plot);
CertifiedValue mu_det(const LatticeBasis& basis, const SearchOptions& opts = {});

struct UncrossingReport {
  SublatticeWitness meet;        // L1 intersected with L2
  SublatticeWitness join;        // L1 + L2 as a subgroup
  SublatticeWitness saturated_join;
  double det1 = 0, det2 = 0, det_meet = 0, det_join = 0;
  bool rank_identity = false;
  bool inequality = false;  // det(meet) det(join) <= det(L1) det(L2)
};

UncrossingReport uncrossing_check(const LatticeBasis& basis, const SublatticeWitness& l1,
                                  const SublatticeWitness& l2);

/// 2e ceil(log(2 m_1)) max_j m_j (prod_{i>=j} a_i^{d_i})^{1/m_j}, m_j = sum_{i>=j} d_i.
double reverse_amgm_bound(const std::vector<double>& a, const std::vector<int>& d);

/// gamma_k^{k/2} for k <= 8 (Hermite constants); Minkowski's bound above.
double hermite_power(std::size_t k);

bool is_primitive(const LatticeBasis& basis, const SublatticeWitness& sub);

}  // namespace latkit
