#pragma once

// Path simulation, excursion decomposition between visits to the reference
// line, and Monte Carlo estimators built on independent excursions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "halfstrip/model.hpp"
#include "halfstrip/rng.hpp"

namespace halfstrip {

struct PathSample {
  std::vector<State> states;
  std::uint64_t seed = 0;
  std::string model_id;
};

/// Inverse-CDF draw from a row whose entries are sorted; u in [0,1).
State sample_transition(const TransitionRow& row, double u);
State step(const Model& model, State from, RandomStream& rng);

PathSample run_path(const Model& model, State initial, std::size_t steps, std::uint64_t seed);

struct ExcursionRecord {
  Height start_x = 0;
  Height end_x = 0;
  std::size_t duration = 0;
  Height max_dev = 0;
  /// Visits per line over [tau_n, tau_{n+1}).
  std::vector<std::size_t> occupation;

  bool operator==(const ExcursionRecord&) const = default;
};

struct ExcursionDecomposition {
  std::vector<ExcursionRecord> excursions;
  std::size_t first_visit = 0;
  /// Steps after the last visit, discarded as an incomplete excursion.
  std::size_t trailing_steps = 0;
};

/// Throws NoReturn when the path visits the reference line fewer than twice.
ExcursionDecomposition decompose_excursions(const PathSample& path, std::size_t reference_line,
                                            std::size_t line_count);

std::vector<Height> embedded_chain(std::span<const ExcursionRecord> excursions);

struct MomentEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
  double ci_halfwidth = 0.0;

  static MomentEstimate from_samples(std::span<const double> samples);
  double standard_error() const;
};

struct TrialOptions {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  /// Cap on the length of a single excursion.
  std::size_t max_excursion_steps = 100'000'000;
};

/// Runs fn(trial) for trial in [0, trials) on `jobs` threads. Callers write
/// into per-trial slots, so merging in trial order is deterministic.
template <class Fn>
void for_each_trial(std::size_t trials, unsigned jobs, Fn&& fn);

struct ExcursionRun {
  ExcursionRecord record;
  bool hit_zero = false;
  bool truncated = false;
  /// Sum of the row-exact drifts mu_1(X_k, eta_k) over the excursion steps.
  double drift_sum = 0.0;
};

/// One excursion started at (x, reference line).
ExcursionRun run_excursion(const Model& model, Height x, RandomStream& rng,
                           std::size_t max_steps);

struct OccupationRatioEstimate {
  MomentEstimate estimate;
  std::size_t boundary_hits = 0;
  std::size_t truncated = 0;
};

OccupationRatioEstimate estimate_occupation_ratio(const Model& model, Height x0, std::size_t line,
                                                  std::size_t trials, const TrialOptions& opts);

struct EmbeddedMoments {
  /// Sample mean of Y_1 - Y_0.
  MomentEstimate m1;
  MomentEstimate m2;
  /// Mean of the summed row drifts along each excursion. Same expectation as
  /// m1 by optional stopping, without the per-step jump noise.
  MomentEstimate m1_compensator;
  std::size_t boundary_hits = 0;
  std::size_t truncated = 0;
};

EmbeddedMoments estimate_embedded_moments(const Model& model, Height x, std::size_t trials,
                                          const TrialOptions& opts);

/// Least-squares line y = intercept + slope * t.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};
LineFit fit_line(std::span<const double> t, std::span<const double> y);

struct TailProfile {
  /// (r, empirical P[tau > r]) for r = 0..r_max.
  std::vector<std::pair<std::size_t, double>> survival;
  /// Fit of log-survival on r over the range where survival >= 50/trials.
  LineFit fit;
  std::size_t boundary_hits = 0;
};

TailProfile tau_tail_profile(const Model& model, Height x, std::size_t trials, std::size_t r_max,
                             const TrialOptions& opts);

struct DeviationProfile {
  /// (d, empirical P[D >= d]).
  std::vector<std::pair<Height, double>> tail;
  /// Log-log fit over d > 0 where the tail is >= 50/trials.
  LineFit fit;
  /// Excursions with max_dev > duration (impossible for unit-jump models).
  std::size_t exceeds_duration = 0;
  std::size_t boundary_hits = 0;
};

DeviationProfile max_deviation_profile(const Model& model, Height x, std::size_t trials,
                                       const std::vector<Height>& d_grid,
                                       const TrialOptions& opts);

/// N(n) = max{k : tau_k <= n} along a path of n steps.
std::size_t renewal_count(const PathSample& path, std::size_t reference_line);

/// Mean of N(n)/n over independent paths.
MomentEstimate renewal_rate(const Model& model, State initial, std::size_t n, std::size_t trials,
                            const TrialOptions& opts);

/// Time-average visit frequency (1/n) sum_{k<n} 1{X_k = x} per x, over
/// independent paths.
std::vector<std::pair<Height, MomentEstimate>> occupation_measure(
    const Model& model, State initial, std::size_t n, const std::vector<Height>& x_set,
    std::size_t trials, const TrialOptions& opts);

}  // namespace halfstrip

#include "halfstrip/detail/trials.hpp"
