#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "halfstrip/model.hpp"
#include "halfstrip/stationary.hpp"

namespace halfstrip {

enum class Verdict { Transient, NullRecurrent, PositiveRecurrent, Inconclusive };

std::string_view to_string(Verdict v) noexcept;

struct ClassificationResult {
  Verdict verdict = Verdict::Inconclusive;
  /// Named decision quantities: "D" in constant mode; "A", "B" in Lamperti mode.
  std::vector<std::pair<std::string, double>> decision_values;
  bool boundary = false;
  std::vector<std::string> assumptions_used;

  double value(std::string_view name) const;
};

inline constexpr double kDecisionTolerance = 1e-12;

/// Sign test on sum_i d_i pi(i); the tolerance is relative to
/// sum_i |d_i| pi(i).
ClassificationResult classify_constant(const std::vector<double>& d,
                                       const StationaryDistribution& pi,
                                       double tol = kDecisionTolerance);

/// Lamperti-regime trichotomy on A = sum 2 c_i pi(i), B = sum s_i^2 pi(i);
/// the tolerance is relative to B.
ClassificationResult classify_lamperti(const DriftParams& params, const StationaryDistribution& pi,
                                       double tol = kDecisionTolerance);

struct DriftEstimate {
  DriftParams params;
  /// Extrapolation spread per line for each fitted quantity.
  std::vector<double> residual_d, residual_c, residual_s2;
  bool clamped_rows = false;
};

inline constexpr double kDriftSpreadTolerance = 1e-4;
/// Smallest decision tolerance used with estimated constants.
inline constexpr double kEstimatedDecisionFloor = 1e-9;

/// Row-exact moments on the grid, extrapolated to x -> infinity. The limit
/// matrix is extrapolated too. Estimated params never claim `sharp`.
DriftEstimate estimate_drift_params(const Model& model, const std::vector<Height>& grid,
                                    DriftMode mode);

struct ModelClassification {
  ClassificationResult result;
  ModulationMatrix q;
  StationaryDistribution pi;
  DriftParams params;
  bool estimated = false;
  double limit_spread = 0.0;
  std::vector<double> residuals;
};

/// limit matrix -> stationary distribution -> params -> decision rule.
/// Declared params are used unless `force_estimate` is set or the model has
/// none for the requested mode.
ModelClassification classify_model(const Model& model, DriftMode mode,
                                   const std::vector<Height>& grid, bool force_estimate = false);

}  // namespace halfstrip
