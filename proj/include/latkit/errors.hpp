#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace latkit {

class LatkitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis rows are linearly dependent, or the matrix is otherwise unusable.
class InvalidBasis : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

class InvalidInput : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

/// A sublattice that must be primitive (equal to its saturation) is not.
class NotPrimitive : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

class DimensionCap : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

/// Work would exceed the configured point budget. When a partial result is
/// meaningful (e.g. a mass enclosure that is valid but too wide) it is attached
/// as a [lower, upper] pair.
class BudgetExceeded : public LatkitError {
 public:
  explicit BudgetExceeded(const std::string& what,
                          std::optional<std::pair<double, double>> best = std::nullopt)
      : LatkitError(what), best_interval(best) {}
  std::optional<std::pair<double, double>> best_interval;
};

/// A verification premise (all sublattice determinants >= 1) failed.
class PremiseNotMet : public LatkitError {
 public:
  PremiseNotMet(const std::string& what, double witness_det, int witness_rank)
      : LatkitError(what), witness_det(witness_det), witness_rank(witness_rank) {}
  double witness_det;
  int witness_rank;
};

class NotApplicable : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

class Inconclusive : public LatkitError {
 public:
  using LatkitError::LatkitError;
};

}  // namespace latkit
