#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "latkit/core.hpp"
#include "latkit/stability.hpp"

namespace latkit {

enum class CheckStatus { pass, fail, inconclusive };
enum class CheckMethod { certified, monte_carlo, closed_form };

const char* to_string(CheckStatus s);
const char* to_string(CheckMethod m);

/// One inequality: [lhs_lower, lhs_upper] `relation` [rhs_lower, rhs_upper].
/// With scale "log" both sides are natural logs of the displayed quantities.
struct Check {
  std::string name;
  std::string anchor;  // the statement being checked
  double lhs_lower = 0, lhs_upper = 0;
  double rhs_lower = 0, rhs_upper = 0;
  std::string relation = "<=";
  std::string scale = "linear";
  CheckMethod method = CheckMethod::certified;
  CheckStatus status = CheckStatus::inconclusive;
  /// Conditional checks (outside a hypothesis, or on a user-supplied
  /// constant) are reported but never decide the outcome.
  bool conditional = false;
  std::string note;
};

struct VerificationReport {
  std::string lattice_name;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> parameters;

  bool passed() const;          // no failing non-conditional check
  bool inconclusive() const;    // some non-conditional check inconclusive
  void append(const VerificationReport& other);
};

/// Non-finite numbers are written as null.
nlohmann::json report_to_json(const VerificationReport& report);

struct VerifyOptions {
  double eps = 1e-12;  // relative width of mass enclosures
  SearchOptions search;
  bool normalize = false;  // rescale to det 1 before the premise check
  std::uint64_t samples = 200'000;
  std::uint64_t seed = 0;
};

/// 10 (log n + 2).
double rm_parameter(std::size_t n);

/// Copy scaled to determinant 1 (exact when the scale factor is rational).
LatticeBasis normalized(const LatticeBasis& basis);

/// Certifies that every sublattice has determinant >= 1. Throws PremiseNotMet
/// with the densest offending witness, or Inconclusive when the sublattice
/// search did not finish.
CanonicalPlot check_premise(const LatticeBasis& basis, const SearchOptions& search = {});

VerificationReport verify_reverse_minkowski(const LatticeBasis& basis, const VerifyOptions& opts = {});
VerificationReport verify_all_parameters(const LatticeBasis& basis, double s, const VerifyOptions& opts = {});
VerificationReport verify_counting(const LatticeBasis& basis, double r, std::span<const double> u = {},
                                   const VerifyOptions& opts = {});
VerificationReport verify_covering(const LatticeBasis& basis, std::optional<double> l_n = std::nullopt,
                                   const VerifyOptions& opts = {});
/// Throws NotApplicable unless s is in one of the extreme ranges.
VerificationReport verify_extreme(const LatticeBasis& basis, double s, const VerifyOptions& opts = {});
/// Throws Inconclusive when no t with gamma_{1/t}(V) >= 2/3 is found.
VerificationReport verify_concentration(const LatticeBasis& basis, double tau, const VerifyOptions& opts = {});
VerificationReport verify_log_convexity(const LatticeBasis& basis, double s, double t1, double t2,
                                        const VerifyOptions& opts = {});
/// e^{-4n}/2 <= rho_s(L) gamma_s(V(L)) <= 1.
VerificationReport verify_rho_gamma(const LatticeBasis& basis, double s, const VerifyOptions& opts = {});
VerificationReport verify_zn_claims(std::size_t n, const std::vector<double>& s_list,
                                    const std::vector<double>& r_list);

struct LogBoundScan {
  VerificationReport report;
  double max_value = 0;
  double argmax = 0;
};
/// e^{-2 log^2 x} + e^{-2 log^2(x/(x-1))} on `points` log-spaced x in (lo, hi).
LogBoundScan scan_claim_log_bound(std::size_t points = 1'000'000, double lo = 1 + 1e-6, double hi = 1e6);

struct RandomLattice2D {
  double x = 0, y = 1;  // tau = x + iy in the fundamental domain
  LatticeBasis basis;   // rows (1/sqrt(y), 0), (x/sqrt(y), sqrt(y))
};

/// Draw from the SL_2(R)-invariant probability measure (density 1/y^2 on the
/// fundamental domain, by rejection). Deterministic in (seed, index).
RandomLattice2D sample_random_lattice_2d(std::uint64_t seed, std::uint64_t index = 0);

struct SiegelStats {
  VerificationReport report;
  double mean = 0, std_error = 0, variance = 0;
  double stable_fraction = 0, stable_std_error = 0;
  double tight_fraction = 0;  // |L cap rB| >= vol(rB)/2
};
SiegelStats siegel_experiment(double r, std::uint64_t trials, std::uint64_t seed);

/// Runs the named suite: all, rm, params, counting, covering, extreme.
VerificationReport verify_suite(const LatticeBasis& basis, const std::string& suite, const VerifyOptions& opts = {},
                                std::optional<double> l_n = std::nullopt);

}  // namespace latkit
