// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any
// criterion fails. Tolerances and budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "halfstrip/classify.hpp"
#include "halfstrip/coupling.hpp"
#include "halfstrip/model.hpp"
#include "halfstrip/simulate.hpp"
#include "halfstrip/stationary.hpp"
#include "halfstrip/weaklimit.hpp"

using namespace halfstrip;

namespace {

const std::vector<Height> kGrid = {1000, 10000, 100000};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

TrialOptions trial_options(std::uint64_t seed) {
  return {.seed = seed, .jobs = std::max(1u, std::thread::hardware_concurrency())};
}

ModulationMatrix random_stochastic(std::size_t n, std::mt19937_64& gen, double zero_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModulationMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // A cycle i -> i+1 keeps the matrix irreducible whatever else is zeroed.
      const bool keep = j == (i + 1) % n || u(gen) >= zero_fraction;
      m(i, j) = keep ? u(gen) + 1e-3 : 0.0;
      sum += m(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= sum;
  }
  return m;
}

Outcome criterion1() {
  const std::vector<double> cs = {-1, -0.6, -0.5, -0.25, 0, 0.25, 0.5, 0.6, 1};
  bool ok = true;
  std::string detail;
  for (double c : cs) {
    const auto r = classify_model(*correlated_walk_model(c, {}, true), DriftMode::Lamperti, kGrid);
    const Verdict want = c < -0.5  ? Verdict::PositiveRecurrent
                         : c > 0.5 ? Verdict::Transient
                                   : Verdict::NullRecurrent;
    const bool boundary_ok = r.result.boundary == (std::abs(c) == 0.5);
    ok = ok && r.result.verdict == want && boundary_ok;
    detail += fmt("c=%g:%s%s ", c, std::string(to_string(r.result.verdict)).c_str(),
                  r.result.boundary ? "(boundary)" : "");
  }
  return {ok, detail};
}

Outcome criterion2() {
  std::mt19937_64 gen(20260214);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<double, Verdict>> cases = {
      {-1.0, Verdict::PositiveRecurrent}, {0.0, Verdict::NullRecurrent}, {1.0, Verdict::Transient}};
  for (const auto& [cbar, want] : cases) {
    const auto a = random_stochastic(3, gen, 0.0);
    const auto b = random_stochastic(3, gen, 0.0);
    ModulationMatrix m(3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = 0.5 * (a(i, j) + b(i, j));
    const auto pi = stationary_distribution(m);
    std::vector<double> c = {u(gen), u(gen), u(gen)};
    const double mean = c[0] * pi[0] + c[1] * pi[1] + c[2] * pi[2];
    for (double& ci : c) ci += cbar - mean;
    ModulatedQueueOptions opt;
    opt.allow_large_drift = true;
    const auto r = classify_model(*modulated_queue_model(a, b, c, opt), DriftMode::Lamperti, kGrid);
    ok = ok && r.result.verdict == want;
    detail += fmt("cbar=%g:%s ", cbar, std::string(to_string(r.result.verdict)).c_str());
  }
  return {ok, detail};
}

Outcome criterion3() {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  double worst_residual = 0.0, worst_sum = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto q = random_stochastic(size(gen), gen, t % 2 ? 0.7 : 0.0);
    const auto pi = stationary_distribution(q);
    const std::size_t n = q.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += pi[i] * q(i, j);
      worst_residual = std::max(worst_residual, std::abs(v - pi[j]));
      sum += pi[j];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const auto pi = stationary_distribution(ModulationMatrix{{0.9, 0.1}, {0.2, 0.8}});
  const double example = std::max(std::abs(pi[0] - 2.0 / 3.0), std::abs(pi[1] - 1.0 / 3.0));
  return {worst_residual < 1e-10 && worst_sum < 1e-12 && example < 1e-12,
          fmt("max|pi q - pi|=%.2e max|sum-1|=%.2e example err=%.2e", worst_residual, worst_sum,
              example)};
}

Outcome criterion4() {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const double phi = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    e1 = std::max(e1, std::abs(f_cdf({0.5, 2.0}, x) - (2.0 * phi - 1.0)));
  }
  for (double theta : {0.5, 1.0, 2.0, 5.0})
    for (double x = 0.0; x <= 6.0; x += 0.25)
      e2 = std::max(e2, std::abs(f_cdf({1.0, theta}, x) - (1.0 - std::exp(-x * x / theta))));
  for (double alpha : {0.5, 1.5, 3.0})
    for (double theta : {0.5, 2.0, 4.0})
      for (double beta : {0.5, 1.0, 2.0})
        for (double x : {0.2, 0.7, 1.3, 2.5})
          e3 = std::max(e3, std::abs(f_cdf({alpha, theta}, beta * x) -
                                     f_cdf({alpha, theta / (beta * beta)}, x)));
  return {e1 < 1e-10 && e2 < 1e-12 && e3 < 1e-12,
          fmt("half-normal err=%.2e exponential err=%.2e scaling err=%.2e", e1, e2, e3)};
}

Outcome criterion5() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 8);
  double marg = 0.0, mass = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = size(gen);
    std::vector<double> p(n), q(n);
    double sp = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = u(gen) < 0.25 ? 0.0 : u(gen);
      q[j] = t % 10 == 0 ? p[j] : (u(gen) < 0.25 ? 0.0 : u(gen));
      sp += p[j];
      sq += q[j];
    }
    if (sp == 0.0) p[0] = sp = 1.0;
    if (sq == 0.0) q[0] = sq = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] /= sp;
      q[j] /= sq;
    }
    if (t % 10 == 0) q = p;
    const auto row = coupling_joint_row(p, q);
    const auto m1 = row.marginal_first();
    const auto m2 = row.marginal_second();
    double tv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      marg = std::max({marg, std::abs(m1[j] - p[j]), std::abs(m2[j] - q[j])});
      tv += std::abs(p[j] - q[j]);
    }
    mass = std::max(mass, std::abs(row.decoupling_mass - 0.5 * tv));
  }

  // (X, eta) after a few steps of the triple chain against the model itself.
  const auto walk = correlated_walk_model(0.5);
  const auto q = limit_matrix(*walk, kGrid).q;
  constexpr std::size_t kTrials = 100'000, kSteps = 10;
  std::map<State, long> coupled, direct;
  for (std::size_t t = 0; t < kTrials; ++t) {
    RandomStream rc(501, t), rd(502, t);
    CoupledState c{3, 0, 0, true};
    State s{3, 0};
    for (std::size_t k = 0; k < kSteps; ++k) {
      c = coupled_step(*walk, q, c, rc);
      s = step(*walk, s, rd);
    }
    ++coupled[{c.x, c.line}];
    ++direct[s];
  }
  for (const auto& [s, n] : direct) coupled.try_emplace(s, 0);
  // Two equal-sized samples; sparse cells are pooled into one.
  double chi2 = 0.0;
  long pooled_a = 0, pooled_b = 0;
  std::size_t cells = 0;
  for (const auto& [s, a] : coupled) {
    const long b = direct[s];
    if (a + b < 20) {
      pooled_a += a;
      pooled_b += b;
      continue;
    }
    chi2 += static_cast<double>((a - b) * (a - b)) / static_cast<double>(a + b);
    ++cells;
  }
  if (pooled_a + pooled_b > 0) {
    chi2 += static_cast<double>((pooled_a - pooled_b) * (pooled_a - pooled_b)) /
            static_cast<double>(pooled_a + pooled_b);
    ++cells;
  }
  const double critical =
      boost::math::quantile(boost::math::chi_squared(static_cast<double>(cells - 1)), 0.999);
  return {marg < 1e-12 && mass < 1e-15 && chi2 < critical,
          fmt("marginal err=%.2e tv err=%.2e chi2=%.2f (df %zu, critical %.2f)", marg, mass, chi2,
              cells - 1, critical)};
}

Outcome criterion6() {
  const auto walk = correlated_walk_model(0.0);
  const auto r = estimate_occupation_ratio(*walk, 10'000, 1, 10'000, trial_options(6));
  const double mean = r.estimate.mean, hw = r.estimate.ci_halfwidth;
  return {std::abs(mean - 1.0) <= 0.05 && std::abs(mean - 1.0) <= hw,
          fmt("ratio=%.4f 95%% CI=[%.4f, %.4f] boundary_hits=%zu", mean, mean - hw, mean + hw,
              r.boundary_hits)};
}

Outcome criterion7() {
  constexpr Height x = 1000;
  const auto half = estimate_embedded_moments(*correlated_walk_model(0.5), x, 10'000,
                                              trial_options(7));
  const auto zero = estimate_embedded_moments(*correlated_walk_model(0.0), x, 10'000,
                                              trial_options(8));
  const double xm1 = x * half.m1.mean, xm1_se = x * half.m1.standard_error();
  const double m2 = zero.m2.mean;
  std::printf("  info criterion 7: summed-drift estimate x*m1 = %.4f +- %.4f (SE, not gating)\n",
              x * half.m1_compensator.mean, x * half.m1_compensator.standard_error());
  return {std::abs(xm1 - 1.0) <= 0.15 && std::abs(m2 - 2.0) <= 0.15,
          fmt("x*m1=%.3f (SE %.3f) m2=%.4f (SE %.4f)", xm1, xm1_se, m2,
              zero.m2.standard_error())};
}

Outcome criterion8() {
  const auto r =
      renewal_rate(*correlated_walk_model(0.0), {0, 0}, 100'000, 50, trial_options(9));
  return {std::abs(r.mean - 0.5) <= 0.02, fmt("N(n)/n=%.4f (SE %.4f)", r.mean, r.standard_error())};
}

Outcome criterion9() {
  bool ok = true;
  std::string detail;
  for (double c : {0.0, 1.0}) {
    const auto walk = correlated_walk_model(c);
    const auto cls = classify_model(*walk, DriftMode::Lamperti, kGrid);
    const WeakLimitParams params{c + 0.5, 2.0};
    const auto r = weak_limit_test(*walk, params, cls.pi, 10'000, 2000, {0, 0},
                                   trial_options(c == 0.0 ? 10 : 11));
    double worst = 0.0;
    for (const auto& f : r.frequencies) {
      const double z = std::abs(f.empirical - 0.5) / f.standard_error;
      worst = std::max(worst, z);
    }
    ok = ok && r.marginal_ks < 0.05 && worst <= 4.0;
    detail += fmt("c=%g: KS=%.4f max|z|=%.2f  ", c, r.marginal_ks, worst);
  }
  return {ok, detail};
}

Outcome criterion10() {
  const auto p = tau_tail_profile(*correlated_walk_model(0.0), 1000, 100'000, 60, trial_options(12));
  return {p.fit.slope < 0.0 && p.fit.r_squared > 0.95,
          fmt("slope=%.4f R^2=%.5f points=%zu", p.fit.slope, p.fit.r_squared, p.fit.points)};
}

Outcome criterion11() {
  constexpr std::size_t kN = 1'000'000, kPaths = 8;
  const ModulationMatrix m{{0.2, 0.5, 0.3}, {0.4, 0.2, 0.4}, {0.3, 0.3, 0.4}};
  ModulatedQueueOptions opt;
  opt.allow_large_drift = true;
  const auto queue = modulated_queue_model(m, m, {-1.0, -1.0, -1.0}, opt);
  const auto q = occupation_measure(*queue, {0, 0}, kN, {0}, kPaths, trial_options(13));
  const auto w =
      occupation_measure(*correlated_walk_model(0.0), {0, 0}, kN, {0}, kPaths, trial_options(14));
  const auto& nq = q.front().second;
  const auto& nw = w.front().second;
  return {nq.mean - nq.ci_halfwidth > 0.0 && nw.mean < 0.01,
          fmt("queue nu(0)=%.4f CI=[%.4f, %.4f]  walk nu(0)=%.5f", nq.mean,
              nq.mean - nq.ci_halfwidth, nq.mean + nq.ci_halfwidth, nw.mean)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "correlated walk classification", 1, criterion1},
      {2, "modulated queue classification", 1, criterion2},
      {3, "stationary solver", 5, criterion3},
      {4, "limit law numerics", 1, criterion4},
      {5, "coupling validity", 30, criterion5},
      {6, "occupation ratio of line -1", 60, criterion6},
      {7, "embedded chain moments", 60, criterion7},
      {8, "renewal rate", 60, criterion8},
      {9, "weak limit Monte Carlo", 300, criterion9},
      {10, "excursion duration tail", 60, criterion10},
      {11, "null/positive occupation", 120, criterion11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s | %s | %.2fs (budget %.0fs)%s\n", pass ? "PASS" : "FAIL",
                c.id, c.name, o.detail.c_str(), secs, c.budget_seconds,
                in_budget ? "" : " over budget");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
