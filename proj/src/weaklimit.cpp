#include "halfstrip/weaklimit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "halfstrip/classify.hpp"
#include "halfstrip/error.hpp"

namespace halfstrip {

void WeakLimitParams::validate() const {
  if (!(alpha > 0.0) || !(theta > 0.0) || !std::isfinite(alpha) || !std::isfinite(theta)) {
    fail(ErrorCode::InvalidArgument, "weak limit: alpha and theta must be positive");
  }
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 100000;

// Power series for P(a, x); converges for every x, fastest for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x), x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "regularized_gamma_p: a must be positive");
  if (std::isnan(x) || x < 0.0) {
    fail(ErrorCode::InvalidArgument, "regularized_gamma_p: x must be >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::clamp(gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(1.0 - gamma_q_fraction(a, x), 0.0, 1.0);
}

WeakLimitParams alpha_theta(const DriftParams& params, const StationaryDistribution& pi,
                            const ModulationMatrix& q) {
  const std::size_t n = pi.size();
  if (params.c.size() != n || params.s2.size() != n) {
    fail(ErrorCode::InvalidArgument, "alpha_theta: need Lamperti constants c and s2");
  }
  double cbar = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cbar += params.c[i] * pi[i];
    b += params.s2[i] * pi[i];
  }
  if (!(b > 0.0)) fail(ErrorCode::HypothesisFailed, "alpha_theta: sum s_i^2 pi(i) is zero");
  if (!is_aperiodic(q)) {
    fail(ErrorCode::HypothesisFailed, "alpha_theta: the limit matrix q is periodic");
  }
  // Hypothesis sum (2 c_i + s_i^2) pi(i) > 0, with the classification band.
  if (!(2.0 * cbar + b > kDecisionTolerance * b)) {
    fail(ErrorCode::HypothesisFailed,
         "alpha_theta: sum (2c_i + s_i^2) pi(i) must be positive (alpha <= 0)");
  }
  return {0.5 + cbar / b, 2.0 * b};
}

double f_cdf(const WeakLimitParams& params, double x) {
  params.validate();
  if (std::isnan(x) || x < 0.0) fail(ErrorCode::InvalidArgument, "f_cdf: x must be >= 0");
  return regularized_gamma_p(params.alpha, x * x / params.theta);
}

double f_density(const WeakLimitParams& params, double x) {
  params.validate();
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (params.alpha > 0.5) return 0.0;
    if (params.alpha < 0.5) return std::numeric_limits<double>::infinity();
  }
  const double log_density = std::log(2.0) + (2.0 * params.alpha - 1.0) * std::log(x) -
                             x * x / params.theta - params.alpha * std::log(params.theta) -
                             std::lgamma(params.alpha);
  return std::exp(log_density);
}

double f_quantile(const WeakLimitParams& params, double p) {
  params.validate();
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "f_quantile: p must be in (0,1)");
  double lo = 0.0, hi = std::sqrt(params.theta * std::max(params.alpha, 1.0));
  while (f_cdf(params, hi) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_cdf(params, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ks_distance(std::span<const double> sorted_samples,
                   const std::function<double(double)>& target_cdf, double mass,
                   std::size_t normalizer) {
  if (sorted_samples.empty()) fail(ErrorCode::InvalidArgument, "ks_distance: no samples");
  if (!(mass > 0.0 && mass <= 1.0)) fail(ErrorCode::InvalidArgument, "ks_distance: mass in (0,1]");
  const std::size_t total = normalizer == 0 ? sorted_samples.size() : normalizer;
  if (total < sorted_samples.size()) {
    fail(ErrorCode::InvalidArgument, "ks_distance: normalizer below sample count");
  }
  const double inv = 1.0 / static_cast<double>(total);
  double worst = 0.0;
  std::size_t i = 0;
  while (i < sorted_samples.size()) {
    const double v = sorted_samples[i];
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "ks_distance: non-finite sample");
    if (i > 0 && v < sorted_samples[i - 1]) {
      fail(ErrorCode::InvalidArgument, "ks_distance: samples must be sorted");
    }
    std::size_t j = i;
    while (j < sorted_samples.size() && sorted_samples[j] == v) ++j;
    const double target = mass * target_cdf(v);
    worst = std::max({worst, std::abs(static_cast<double>(j) * inv - target),
                      std::abs(static_cast<double>(i) * inv - target)});
    i = j;
  }
  return worst;
}

double ks_critical_999(std::size_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

WeakLimitReport weak_limit_test(const Model& model, const WeakLimitParams& params,
                                const StationaryDistribution& pi, std::size_t n,
                                std::size_t trials, State initial, const TrialOptions& opts) {
  params.validate();
  const std::size_t lines = model.lines().size();
  if (pi.size() != lines) fail(ErrorCode::InvalidArgument, "weak_limit_test: pi size mismatch");
  if (n == 0 || trials == 0) fail(ErrorCode::InvalidArgument, "weak_limit_test: n, trials >= 1");
  if (initial.x < 0 || initial.line >= lines) {
    fail(ErrorCode::InvalidArgument, "weak_limit_test: invalid initial state");
  }
  std::vector<State> terminal(trials);
  for_each_trial(trials, opts.jobs, [&](std::size_t t) {
    RandomStream rng(opts.seed, t);
    State s = initial;
    for (std::size_t k = 0; k < n; ++k) s = step(model, s, rng);
    terminal[t] = s;
  });

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> all;
  std::vector<std::vector<double>> by_line(lines);
  all.reserve(trials);
  for (const auto& s : terminal) {
    const double v = static_cast<double>(s.x) * scale;
    all.push_back(v);
    by_line[s.line].push_back(v);
  }
  std::sort(all.begin(), all.end());
  auto cdf = [&params](double x) { return f_cdf(params, x); };

  WeakLimitReport report;
  report.params = params;
  report.steps = n;
  report.trials = trials;
  report.marginal_ks = ks_distance(all, cdf);
  for (std::size_t k = 0; k < lines; ++k) {
    auto& v = by_line[k];
    std::sort(v.begin(), v.end());
    LineKs entry{k, v.size(), 0.0};
    // With no samples the sub-CDF is identically 0; its distance is the mass.
    entry.ks = v.empty() ? pi[k] : ks_distance(v, cdf, pi[k], trials);
    report.per_line.push_back(entry);
    const double freq = static_cast<double>(v.size()) / static_cast<double>(trials);
    report.frequencies.push_back(
        {k, freq, pi[k], std::sqrt(pi[k] * (1.0 - pi[k]) / static_cast<double>(trials))});
  }
  const std::size_t mid = trials / 2;
  report.median_scaled = trials % 2 == 1 ? all[mid] : 0.5 * (all[mid - 1] + all[mid]);
  for (int pct = 1; pct <= 99; ++pct) {
    const double p = pct / 100.0;
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(trials)));
    rank = std::clamp<std::size_t>(rank, 1, trials);
    report.qq.push_back({p, all[rank - 1], f_quantile(params, p)});
  }
  return report;
}

WeakLimitReport weak_limit_test(const Model& model, std::size_t n, std::size_t trials,
                                State initial, const TrialOptions& opts,
                                const std::vector<Height>& grid) {
  const ModelClassification cls = classify_model(model, DriftMode::Lamperti, grid);
  const WeakLimitParams params = alpha_theta(cls.params, cls.pi, cls.q);
  return weak_limit_test(model, params, cls.pi, n, trials, initial, opts);
}

}  // namespace halfstrip
