#pragma once

#include <vector>

#include "halfstrip/model.hpp"

namespace halfstrip {

struct StationaryDistribution {
  std::vector<double> pi;

  double operator[](std::size_t i) const { return pi[i]; }
  std::size_t size() const noexcept { return pi.size(); }
  /// Throws Validation unless positive, normalized and sized n.
  void validate(std::size_t n) const;
};

/// Entries below this are treated as structural zeros in graph checks.
inline constexpr double kZeroThreshold = 1e-15;

bool is_irreducible(const ModulationMatrix& q);
/// Every communicating class has period 1.
bool is_aperiodic(const ModulationMatrix& q);
/// Period of an irreducible matrix (gcd of cycle lengths).
std::size_t period(const ModulationMatrix& q);

/// Unique probability vector with pi q = pi. Throws NotIrreducible or
/// SingularSystem.
StationaryDistribution stationary_distribution(const ModulationMatrix& q);

/// Entrywise extrapolation of a sequence f(x_k) sampled on an increasing
/// grid, assuming f(x) ~ L + A x^{-beta}.
struct Extrapolation {
  double value = 0.0;
  /// Disagreement between the estimates from the top-half grid triples.
  double spread = 0.0;
  /// A triple could not be fitted and fell back to its last sample.
  bool fallback = false;
};
Extrapolation extrapolate_limit(const std::vector<double>& grid, const std::vector<double>& values);

struct LimitMatrixResult {
  ModulationMatrix q;
  double spread = 0.0;
  bool declared = false;
  bool fallback = false;
};

inline constexpr double kLimitSpreadTolerance = 1e-6;

/// The x -> infinity limit of q_x. Uses the declared limit when the model
/// has one and `use_declared` is set; otherwise extrapolates q_at over the
/// grid and throws NonConvergent if the spread exceeds 1e-6.
LimitMatrixResult limit_matrix(const Model& model, const std::vector<Height>& grid,
                               bool use_declared = true);

void validate_grid(const std::vector<Height>& grid);

}  // namespace halfstrip
