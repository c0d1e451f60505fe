#include <cmath>

#include "doctest.h"
#include "halfstrip/error.hpp"
#include "halfstrip/model.hpp"

using namespace halfstrip;

namespace {

std::vector<std::vector<Increment>> simple_increments(double up) {
  return {{{1, 0, up}, {-1, 0, 1.0 - up}}};
}

RowTable reflect_at_zero() {
  RowTable t;
  t[{0, 0}] = TransitionRow{{{1, 0, 1.0}}};
  return t;
}

double prob(const TransitionRow& r, Height x, std::size_t line) {
  for (const auto& e : r.entries)
    if (e.x == x && e.line == line) return e.probability;
  return 0.0;
}

}  // namespace

TEST_CASE("modulated queue rows") {
  ModulationMatrix one{{1.0}};
  auto m = modulated_queue_model(one, one, {0.25});
  const auto r = m->row(2, 0);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].x == 1);
  CHECK(r.entries[0].probability == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(r.entries[1].x == 3);
  CHECK(r.entries[1].probability == doctest::Approx(4.0 / 7.0).epsilon(1e-15));

  auto sym = modulated_queue_model(one, one, {0.0});
  for (Height x : {1, 5, 100}) {
    const auto s = sym->row(x, 0);
    CHECK(prob(s, x + 1, 0) == 0.5);
    CHECK(prob(s, x - 1, 0) == 0.5);
  }
  CHECK(q_at(*sym, 7) == one);

  const auto z = m->row(0, 0);
  REQUIRE(z.entries.size() == 1);
  CHECK(z.entries[0].x == 1);
  CHECK(z.entries[0].probability == 1.0);
}

TEST_CASE("modulated queue drift matches c/x over 1 - c/x") {
  ModulationMatrix a{{0.2, 0.8}, {0.6, 0.4}};
  ModulationMatrix b{{0.5, 0.5}, {0.3, 0.7}};
  auto m = modulated_queue_model(a, b, {0.3, -0.45});
  const double c[] = {0.3, -0.45};
  for (Height x = 1; x <= 200; ++x) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double r = c[i] / static_cast<double>(x);
      const auto mom = row_moments(*m, x, i);
      CHECK(mom.m1 == doctest::Approx(r / (1.0 - r)).epsilon(1e-12));
      CHECK(std::abs(mom.m1 - r) <= c[i] * c[i] / (x * x * (1.0 - std::abs(c[i]) / x)) + 1e-15);
      CHECK(mom.m2 == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  const auto& p = m->declared_params();
  REQUIRE(p);
  CHECK(p->limit_q.max_abs_diff(ModulationMatrix{{0.35, 0.65}, {0.45, 0.55}}) < 1e-15);
  CHECK(p->c == std::vector<double>{0.3, -0.45});
  CHECK(p->s2 == std::vector<double>{1.0, 1.0});
}

TEST_CASE("modulated queue rejects bad inputs") {
  ModulationMatrix one{{1.0}};
  ModulationMatrix bad{{0.5, 0.4}, {0.5, 0.5}};
  ModulationMatrix ok{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(modulated_queue_model(one, one, {0.5}), Error);
  CHECK_THROWS_AS(modulated_queue_model(one, one, {-0.7}), Error);
  CHECK_THROWS_AS(modulated_queue_model(bad, ok, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(modulated_queue_model(ok, bad, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(modulated_queue_model(ok, ok, {0.0}), Error);
}

TEST_CASE("modulated queue with large drift") {
  ModulationMatrix one{{1.0}};
  ModulatedQueueOptions opt;
  opt.allow_large_drift = true;
  auto pos = modulated_queue_model(one, one, {1.0}, opt);
  CHECK(pos->row(1, 0).clamped);
  CHECK(pos->row(2, 0).clamped);
  CHECK_FALSE(pos->row(3, 0).clamped);
  CHECK(row_moments(*pos, 4, 0).m1 == doctest::Approx(0.25 / 0.75));
  auto neg = modulated_queue_model(one, one, {-1.0}, opt);
  for (Height x = 1; x < 10; ++x) CHECK_FALSE(neg->row(x, 0).clamped);
  CHECK(row_moments(*neg, 1, 0).m1 == doctest::Approx(-0.5));
}

TEST_CASE("correlated walk rows") {
  auto m = correlated_walk_model(0.5);
  CHECK(m->lines().labels == std::vector<std::string>{"+1", "-1"});
  CHECK(m->lines().reference_line == 0);
  const auto r = m->row(10, 0);
  CHECK(prob(r, 11, 0) == doctest::Approx(0.525).epsilon(1e-15));
  CHECK(prob(r, 9, 1) == doctest::Approx(0.475).epsilon(1e-15));
  // Turning from -1 to +1 is an up-step: q_x(-1, +1) = 1/2 + c/(2x).
  const auto q = q_at(*m, 10);
  CHECK(q.max_abs_diff(ModulationMatrix{{0.525, 0.475}, {0.525, 0.475}}) < 1e-15);
  // Line -1 at x = 10 moves down to (9,-1) or turns up to (11,+1).
  const auto mom = row_moments(*m, 10, 1);
  CHECK(mom.m1 == doctest::Approx(0.05).epsilon(1e-14));
  auto zero = correlated_walk_model(0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& e : zero->row(17, i).entries) CHECK(e.probability == 0.5);
  const auto b = m->row(0, 1);
  CHECK(prob(b, 1, 0) == 0.5);
  CHECK(prob(b, 1, 1) == 0.5);
}

TEST_CASE("correlated walk exact moments and clamping") {
  for (double c : {-1.0, -0.5, 0.0, 0.3, 1.0}) {
    auto m = correlated_walk_model(c);
    for (Height x = 1; x <= 300; ++x) {
      for (std::size_t i = 0; i < 2; ++i) {
        if (m->row(x, i).clamped) continue;
        const auto mom = row_moments(*m, x, i);
        CHECK(mom.m1 == doctest::Approx(c / static_cast<double>(x)).epsilon(1e-12));
        CHECK(mom.m2 == doctest::Approx(1.0).epsilon(1e-14));
      }
    }
  }
  auto big = correlated_walk_model(3.0);
  CHECK(big->row(1, 0).clamped);
  CHECK_FALSE(big->row(3, 0).clamped);
  CHECK(big->row(1, 0).total() == doctest::Approx(1.0));
}

TEST_CASE("correlated walk correction callback") {
  auto m = correlated_walk_model(0.0, [](Height x, int) { return 1.0 / (x * x); });
  const auto r = m->row(2, 0);
  CHECK(prob(r, 3, 0) == doctest::Approx(0.75));
  CHECK(prob(r, 1, 1) == doctest::Approx(0.25));
}

TEST_CASE("homogeneous strip") {
  LineSet one{{"0"}, 0};
  auto walk = homogeneous_strip_model(one, simple_increments(0.5), 1, reflect_at_zero());
  CHECK(walk->row(0, 0).entries.size() == 1);
  CHECK(prob(walk->row(5, 0), 6, 0) == 0.5);
  CHECK(prob(walk->row(5, 0), 4, 0) == 0.5);
  CHECK(walk->declared_params()->mode == DriftMode::Lamperti);
  CHECK(walk->declared_params()->s2 == std::vector<double>{1.0});

  LineSet two{{"A", "B"}, 0};
  std::vector<std::vector<Increment>> inc(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (Height z : {-1, 1})
      for (std::size_t j = 0; j < 2; ++j) inc[i].push_back({z, j, 0.25});
  RowTable bnd;
  bnd[{0, 0}] = TransitionRow{{{1, 0, 1.0}}};
  bnd[{0, 1}] = TransitionRow{{{1, 1, 1.0}}};
  auto strip = homogeneous_strip_model(two, inc, 1, bnd);
  const ModulationMatrix half{{0.5, 0.5}, {0.5, 0.5}};
  CHECK(strip->declared_params()->limit_q == half);
  for (Height x = 1; x < 50; ++x) CHECK(q_at(*strip, x) == half);

  std::vector<std::vector<Increment>> deep = {{{-2, 0, 0.5}, {1, 0, 0.5}}};
  CHECK_THROWS_AS(homogeneous_strip_model(one, deep, 1, reflect_at_zero()), Error);
  std::vector<std::vector<Increment>> short_row = {{{-1, 0, 0.5}, {1, 0, 0.4}}};
  CHECK_THROWS_AS(homogeneous_strip_model(one, short_row, 1, reflect_at_zero()), Error);
  CHECK_THROWS_AS(homogeneous_strip_model(one, simple_increments(0.5), 1, {}), Error);
}

TEST_CASE("homogeneous strip with drift declares constant mode") {
  LineSet one{{"0"}, 0};
  auto m = homogeneous_strip_model(one, simple_increments(0.7), 1, reflect_at_zero());
  const auto& p = *m->declared_params();
  CHECK(p.mode == DriftMode::ConstantDrift);
  CHECK(p.d[0] == doctest::Approx(0.4));
}

TEST_CASE("tabular model") {
  LineSet one{{"0"}, 0};
  auto tail = homogeneous_strip_model(one, simple_increments(0.5), 1, reflect_at_zero());
  auto same = tabular_model({}, tail);
  for (Height x = 0; x < 20; ++x) CHECK(same->row(x, 0).entries == tail->row(x, 0).entries);

  RowTable over;
  over[{0, 0}] = TransitionRow{{{0, 0, 0.5}, {1, 0, 0.5}}};
  auto t = tabular_model(over, tail);
  CHECK(prob(t->row(0, 0), 0, 0) == 0.5);
  CHECK(t->row(3, 0).entries == tail->row(3, 0).entries);
  CHECK(t->declared_params()->s2 == tail->declared_params()->s2);

  RowTable bad;
  bad[{2, 0}] = TransitionRow{{{1, 0, 0.5}, {3, 0, 0.4}}};
  CHECK_THROWS_AS(tabular_model(bad, tail), Error);
}

TEST_CASE("every built-in row sums to one") {
  ModulationMatrix a{{0.1, 0.6, 0.3}, {0.3, 0.3, 0.4}, {0.5, 0.25, 0.25}};
  ModulationMatrix b{{0.7, 0.2, 0.1}, {0.2, 0.2, 0.6}, {0.1, 0.1, 0.8}};
  ModulatedQueueOptions big;
  big.allow_large_drift = true;
  const std::vector<ModelPtr> models = {
      modulated_queue_model(a, b, {0.4, -0.2, 0.1}),
      modulated_queue_model(a, b, {1.0, -1.0, 2.5}, big),
      correlated_walk_model(0.5),
      correlated_walk_model(-2.0),
      homogeneous_strip_model(LineSet{{"0"}, 0}, simple_increments(0.3), 1, reflect_at_zero()),
  };
  for (const auto& m : models) {
    CHECK_NOTHROW(validate_rows(*m, 1000));
    for (Height x = 0; x <= 1000; ++x)
      for (std::size_t i = 0; i < m->lines().size(); ++i)
        CHECK(std::abs(m->row(x, i).total() - 1.0) <= kRowTolerance);
  }
}

TEST_CASE("rows are sorted by height then line") {
  ModulationMatrix a{{0.5, 0.5}, {0.5, 0.5}};
  auto m = modulated_queue_model(a, a, {0.1, 0.1});
  const auto r = m->row(5, 1);
  for (std::size_t k = 1; k < r.entries.size(); ++k) {
    const auto& p = r.entries[k - 1];
    const auto& e = r.entries[k];
    CHECK((p.x < e.x || (p.x == e.x && p.line < e.line)));
  }
}

TEST_CASE("callback model validates rows on use") {
  LineSet one{{"0"}, 0};
  auto m = callback_model(one, [](Height x, std::size_t) {
    return TransitionRow{{{x + 1, 0, 0.6}, {std::max<Height>(x - 1, 0), 0, 0.3}}};
  });
  CHECK_THROWS_AS(m->row(3, 0), Error);
}

TEST_CASE("line set and matrix validation") {
  CHECK_THROWS_AS((LineSet{{"a", "a"}, 0}.validate()), Error);
  CHECK_THROWS_AS((LineSet{{"a"}, 1}.validate()), Error);
  CHECK_THROWS_AS((LineSet{{}, 0}.validate()), Error);
  CHECK_THROWS_AS(ModulationMatrix({{0.5, 0.6}, {0.5, 0.5}}).validate_stochastic(), Error);
  CHECK_THROWS_AS(ModulationMatrix({{-0.1, 1.1}, {0.5, 0.5}}).validate_stochastic(), Error);
  CHECK_NOTHROW(ModulationMatrix({{0.25, 0.75}, {1.0, 0.0}}).validate_stochastic());
  CHECK(parse_drift_mode("lamperti") == DriftMode::Lamperti);
  CHECK(parse_drift_mode("constant") == DriftMode::ConstantDrift);
  CHECK_FALSE(parse_drift_mode("other"));
}
