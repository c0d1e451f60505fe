#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "halfstrip/coupling.hpp"
#include "halfstrip/error.hpp"

using namespace halfstrip;

namespace {

double entry(const CouplingJointRow& row, std::size_t j, std::size_t k) {
  double p = 0.0;
  for (const auto& e : row.entries)
    if (e.j == j && e.k == k) p += e.probability;
  return p;
}

std::vector<double> random_row(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(n);
  double s = 0.0;
  for (auto& v : r) {
    v = u(gen) < 0.2 ? 0.0 : u(gen);
    s += v;
  }
  if (s == 0.0) {
    r[0] = 1.0;
    return r;
  }
  for (auto& v : r) v /= s;
  return r;
}

const ModulationMatrix kHalf{{0.5, 0.5}, {0.5, 0.5}};

}  // namespace

TEST_CASE("joint row example") {
  const std::vector<double> qx = {0.6, 0.4}, q = {0.5, 0.5};
  const auto row = coupling_joint_row(qx, q);
  CHECK(entry(row, 0, 0) == doctest::Approx(0.5));
  CHECK(entry(row, 1, 1) == doctest::Approx(0.4));
  CHECK(entry(row, 0, 1) == doctest::Approx(0.1));
  CHECK(entry(row, 1, 0) == 0.0);
  CHECK(row.decoupling_mass == doctest::Approx(0.1));
  const auto first = row.marginal_first();
  const auto second = row.marginal_second();
  CHECK(first[0] == doctest::Approx(0.6));
  CHECK(first[1] == doctest::Approx(0.4));
  CHECK(second[0] == doctest::Approx(0.5));
  CHECK(second[1] == doctest::Approx(0.5));
}

TEST_CASE("identical rows couple on the diagonal") {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  const auto row = coupling_joint_row(p, p);
  CHECK(row.decoupling_mass == 0.0);
  for (const auto& e : row.entries) CHECK(e.j == e.k);
  const std::vector<double> noisy = {0.2 + 1e-16, 0.3, 0.5 - 1e-16};
  CHECK(coupling_joint_row(noisy, p).decoupling_mass == 0.0);
}

TEST_CASE("joint row fuzz") {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(k % 10);
    const auto a = random_row(gen, n);
    const auto b = random_row(gen, n);
    const auto row = coupling_joint_row(a, b);
    const auto fa = row.marginal_first();
    const auto fb = row.marginal_second();
    double total = 0.0, diag = 0.0;
    for (const auto& e : row.entries) {
      CHECK(e.probability >= 0.0);
      total += e.probability;
      if (e.j == e.k) diag += e.probability;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(fa[i] - a[i]) < 1e-12);
      CHECK(std::abs(fb[i] - b[i]) < 1e-12);
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) tv += std::abs(a[i] - b[i]);
    tv *= 0.5;
    CHECK(row.decoupling_mass == total_variation(a, b));
    CHECK(std::abs(row.decoupling_mass - tv) < 1e-15);
    CHECK(std::abs(1.0 - diag - tv) < 1e-12);
  }
}

TEST_CASE("joint row rejects invalid rows") {
  CHECK_THROWS_AS(coupling_joint_row(std::vector<double>{0.5, 0.4}, std::vector<double>{0.5, 0.5}),
                  Error);
  CHECK_THROWS_AS(coupling_joint_row(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}),
                  Error);
}

TEST_CASE("decoupling probability of the correlated walk") {
  auto walk = correlated_walk_model(0.5);
  // 1/2 (|0.525 - 0.5| + |0.475 - 0.5|) from each line.
  CHECK(decoupling_bound(*walk, kHalf, 10) == doctest::Approx(0.025).epsilon(1e-12));
  const auto qx = q_at(*walk, 10);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(total_variation(qx.row(i), kHalf.row(i)) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(horizon_decoupling_bound(*walk, kHalf, 10, 4) == doctest::Approx(0.1));

  RandomStream rng(4, 0);
  int broke = 0;
  constexpr int n = 200000;
  for (int k = 0; k < n; ++k) broke += !coupled_step(*walk, kHalf, {10, 0, 0, true}, rng).coupled;
  const double p = static_cast<double>(broke) / n;
  CHECK(std::abs(p - 0.025) < 4.0 * std::sqrt(0.025 * 0.975 / n));
}

TEST_CASE("coupled steps keep the invariant and stay decoupled") {
  auto walk = correlated_walk_model(1.0);
  RandomStream rng(2, 0);
  CoupledState s{3, 0, 0, true};
  bool seen_break = false;
  for (int k = 0; k < 5000; ++k) {
    s = coupled_step(*walk, kHalf, s, rng);
    if (s.coupled) {
      CHECK_FALSE(seen_break);
      CHECK(s.line == s.star_line);
    } else {
      seen_break = true;
    }
  }
  CHECK(seen_break);
}

TEST_CASE("decoupled eta* follows q") {
  const ModulationMatrix q{{0.7, 0.3}, {0.4, 0.6}};
  auto walk = correlated_walk_model(0.0);
  RandomStream rng(6, 0);
  constexpr int n = 100000;
  std::array<int, 2> from0{};
  for (int k = 0; k < n; ++k) ++from0[coupled_step(*walk, q, {10, 1, 0, false}, rng).star_line];
  const double p = static_cast<double>(from0[0]) / n;
  CHECK(std::abs(p - 0.7) < 4.0 * std::sqrt(0.7 * 0.3 / n));
}

TEST_CASE("no decoupling when q_x equals q") {
  RowTable bnd;
  bnd[{0, 0}] = TransitionRow{{{1, 0, 1.0}}};
  bnd[{0, 1}] = TransitionRow{{{1, 1, 1.0}}};
  std::vector<std::vector<Increment>> inc(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (Height z : {-1, 1})
      for (std::size_t j = 0; j < 2; ++j) inc[i].push_back({z, j, 0.25});
  auto strip = homogeneous_strip_model(LineSet{{"A", "B"}, 0}, inc, 1, bnd);
  RandomStream rng(1, 1);
  CoupledState s{50, 0, 0, true};
  for (int k = 0; k < 1000; ++k) {
    s = coupled_step(*strip, kHalf, s, rng);
    REQUIRE(s.coupled);
  }
  const auto surv = coupling_survival(*strip, kHalf, 100, 0, 20, 200, {.seed = 3});
  for (const auto& [n, p] : surv.survival) CHECK(p == 1.0);
}

TEST_CASE("coupling survival grows with the starting height") {
  auto walk = correlated_walk_model(0.5);
  double prev = -1.0;
  for (Height x0 : {10, 100, 1000}) {
    const auto s = coupling_survival(*walk, kHalf, x0, 0, 10, 20000, {.seed = 12});
    REQUIRE(s.survival.size() == 11);
    CHECK(s.survival[0].second == 1.0);
    for (std::size_t k = 1; k < s.survival.size(); ++k)
      CHECK(s.survival[k].second <= s.survival[k - 1].second);
    CHECK(s.survival.back().second > prev);
    prev = s.survival.back().second;
  }
}

TEST_CASE("log horizon survival beats the union bound") {
  auto walk = correlated_walk_model(0.5);
  const Height x0 = 10000;
  const std::size_t horizon = log_horizon(2.0, x0);
  CHECK(horizon == static_cast<std::size_t>(std::ceil(2.0 * std::log(10000.0))));
  const auto s = coupling_survival(*walk, kHalf, x0, 0, horizon, 20000, {.seed = 5});
  const double bound = horizon_decoupling_bound(*walk, kHalf, x0 / 2, horizon);
  CHECK(s.survival.back().second >= 1.0 - 10.0 * bound);
  CHECK_THROWS_AS(log_horizon(0.0, 10), Error);
}

TEST_CASE("triple chain (X, eta) marginal matches direct simulation") {
  auto walk = correlated_walk_model(0.5);
  constexpr int n = 100000;
  std::map<State, int> coupled, direct;
  RandomStream rc(10, 0), rd(10, 1);
  for (int k = 0; k < n; ++k) {
    const auto c = coupled_step(*walk, kHalf, {2, 0, 0, true}, rc);
    ++coupled[{c.x, c.line}];
    ++direct[step(*walk, {2, 0}, rd)];
  }
  // Two-sample chi-square; 1 degree of freedom (two outcomes), 0.999 quantile.
  double chi2 = 0.0;
  std::size_t cells = 0;
  for (const auto& [state, a] : coupled) {
    const int b = direct[state];
    chi2 += static_cast<double>((a - b) * (a - b)) / (a + b);
    ++cells;
  }
  CHECK(cells == 2);
  CHECK(chi2 < 10.83);
}
