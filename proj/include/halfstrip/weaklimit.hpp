#pragma once

// The limit law F_{alpha,theta} of n^{-1/2} X_n and goodness-of-fit checks
// of the joint limit pi(k) F_{alpha,theta}(x).

#include <cstddef>
#include <functional>
#include <span>
#include <tuple>
#include <vector>

#include "halfstrip/model.hpp"
#include "halfstrip/simulate.hpp"
#include "halfstrip/stationary.hpp"

namespace halfstrip {

struct WeakLimitParams {
  double alpha = 0.5;
  double theta = 2.0;

  void validate() const;
};

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// alpha = 1/2 + sum c_i pi(i) / sum s_i^2 pi(i), theta = 2 sum s_i^2 pi(i).
/// Throws HypothesisFailed when alpha <= 0 or q is periodic.
WeakLimitParams alpha_theta(const DriftParams& params, const StationaryDistribution& pi,
                            const ModulationMatrix& q);

/// F_{alpha,theta}(x) = P(alpha, x^2/theta).
double f_cdf(const WeakLimitParams& params, double x);
/// Density of F_{alpha,theta}.
double f_density(const WeakLimitParams& params, double x);
double f_quantile(const WeakLimitParams& params, double p);

/// sup over sample points of |empirical - mass * target|. The empirical
/// sub-CDF divides by `normalizer` (0 means samples.size()).
double ks_distance(std::span<const double> sorted_samples,
                   const std::function<double(double)>& target_cdf, double mass = 1.0,
                   std::size_t normalizer = 0);


struct LineKs {
  std::size_t line = 0;
  std::size_t count = 0;
  double ks = 0.0;
};

struct LineFrequency {
  std::size_t line = 0;
  double empirical = 0.0;
  double expected = 0.0;
  double standard_error = 0.0;
};

struct QqPoint {
  double p = 0.0;
  double empirical = 0.0;
  double theoretical = 0.0;
};

struct WeakLimitReport {
  WeakLimitParams params;
  std::size_t steps = 0;
  std::size_t trials = 0;
  std::vector<LineKs> per_line;
  double marginal_ks = 0.0;
  std::vector<LineFrequency> frequencies;
  /// Median of n^{-1/2} X_n.
  double median_scaled = 0.0;
  std::vector<QqPoint> qq;
};

/// Kolmogorov critical value at level 0.999: 1.95 / sqrt(n).
double ks_critical_999(std::size_t n);

/// Simulates `trials` paths of n steps from `initial` and compares the
/// terminal (n^{-1/2} X_n, eta_n) with pi(k) F_{alpha,theta}.
WeakLimitReport weak_limit_test(const Model& model, const WeakLimitParams& params,
                                const StationaryDistribution& pi, std::size_t n,
                                std::size_t trials, State initial, const TrialOptions& opts);

/// Resolves params from the model's declared (or estimated) drift
/// parameters first; throws HypothesisFailed when the theorem does not apply.
WeakLimitReport weak_limit_test(const Model& model, std::size_t n, std::size_t trials,
                                State initial, const TrialOptions& opts,
                                const std::vector<Height>& grid = {1000, 10000, 100000});

}  // namespace halfstrip
