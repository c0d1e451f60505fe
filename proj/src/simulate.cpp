#include "halfstrip/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "halfstrip/error.hpp"

namespace halfstrip {

State sample_transition(const TransitionRow& row, double u) {
  if (row.entries.empty()) fail(ErrorCode::InvalidArgument, "cannot sample an empty row");
  double acc = 0.0;
  for (const auto& e : row.entries) {
    acc += e.probability;
    if (u < acc) return {e.x, e.line};
  }
  // u landed in the rounding gap above the accumulated total.
  for (auto it = row.entries.rbegin(); it != row.entries.rend(); ++it) {
    if (it->probability > 0.0) return {it->x, it->line};
  }
  return {row.entries.back().x, row.entries.back().line};
}

State step(const Model& model, State from, RandomStream& rng) {
  return sample_transition(model.row(from.x, from.line), rng.uniform());
}

PathSample run_path(const Model& model, State initial, std::size_t steps, std::uint64_t seed) {
  if (steps == 0) fail(ErrorCode::InvalidArgument, "run_path: steps must be >= 1");
  if (initial.x < 0 || initial.line >= model.lines().size()) {
    fail(ErrorCode::InvalidArgument, "run_path: invalid initial state");
  }
  PathSample path;
  path.seed = seed;
  path.model_id = std::string(model.kind());
  path.states.reserve(steps + 1);
  path.states.push_back(initial);
  RandomStream rng(seed, 0);
  State s = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    s = step(model, s, rng);
    path.states.push_back(s);
  }
  return path;
}

ExcursionDecomposition decompose_excursions(const PathSample& path, std::size_t reference_line,
                                            std::size_t line_count) {
  if (reference_line >= line_count) {
    fail(ErrorCode::InvalidArgument, "decompose_excursions: reference line out of range");
  }
  std::vector<std::size_t> visits;
  for (std::size_t m = 0; m < path.states.size(); ++m) {
    if (path.states[m].line == reference_line) visits.push_back(m);
  }
  if (visits.size() < 2) {
    fail(ErrorCode::NoReturn, "decompose_excursions: the path visits the reference line only " +
                                  std::to_string(visits.size()) + " time(s)");
  }
  ExcursionDecomposition out;
  out.first_visit = visits.front();
  out.trailing_steps = path.states.size() - 1 - visits.back();
  out.excursions.reserve(visits.size() - 1);
  for (std::size_t k = 0; k + 1 < visits.size(); ++k) {
    const std::size_t from = visits[k], to = visits[k + 1];
    ExcursionRecord rec;
    rec.start_x = path.states[from].x;
    rec.end_x = path.states[to].x;
    rec.duration = to - from;
    rec.occupation.assign(line_count, 0);
    for (std::size_t m = from; m <= to; ++m) {
      rec.max_dev = std::max(rec.max_dev, std::abs(path.states[m].x - rec.start_x));
      if (m < to) {
        const std::size_t line = path.states[m].line;
        if (line >= line_count) {
          fail(ErrorCode::InvalidArgument, "decompose_excursions: line out of range");
        }
        ++rec.occupation[line];
      }
    }
    out.excursions.push_back(std::move(rec));
  }
  return out;
}

std::vector<Height> embedded_chain(std::span<const ExcursionRecord> excursions) {
  std::vector<Height> out;
  out.reserve(excursions.size());
  for (const auto& e : excursions) out.push_back(e.start_x);
  return out;
}

MomentEstimate MomentEstimate::from_samples(std::span<const double> samples) {
  MomentEstimate m;
  m.count = samples.size();
  if (m.count == 0) return m;
  // Welford, in sample order.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : samples) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  m.mean = mean;
  m.variance = m.count > 1 ? m2 / static_cast<double>(m.count - 1) : 0.0;
  m.ci_halfwidth = 1.96 * std::sqrt(m.variance / static_cast<double>(m.count));
  return m;
}

double MomentEstimate::standard_error() const {
  return count == 0 ? 0.0 : std::sqrt(variance / static_cast<double>(count));
}

ExcursionRun run_excursion(const Model& model, Height x, RandomStream& rng,
                           std::size_t max_steps) {
  const std::size_t ref = model.lines().reference_line;
  ExcursionRun run;
  auto& rec = run.record;
  rec.start_x = x;
  rec.occupation.assign(model.lines().size(), 0);
  State s{x, ref};
  do {
    ++rec.occupation[s.line];
    const TransitionRow row = model.row(s.x, s.line);
    run.drift_sum += row.moment(s.x, 1);
    s = sample_transition(row, rng.uniform());
    ++rec.duration;
    rec.max_dev = std::max(rec.max_dev, std::abs(s.x - x));
    if (s.x == 0) run.hit_zero = true;
    if (rec.duration >= max_steps && s.line != ref) {
      run.truncated = true;
      break;
    }
  } while (s.line != ref);
  rec.end_x = s.x;
  return run;
}

namespace {

void check_trials(std::size_t trials, const char* who) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, std::string(who) + ": trials must be >= 1");
}

void check_start(Height x, const char* who) {
  if (x < 0) fail(ErrorCode::InvalidArgument, std::string(who) + ": negative start height");
}

std::vector<ExcursionRun> run_excursions(const Model& model, Height x, std::size_t trials,
                                         const TrialOptions& opts) {
  std::vector<ExcursionRun> runs(trials);
  for_each_trial(trials, opts.jobs, [&](std::size_t t) {
    RandomStream rng(opts.seed, t);
    runs[t] = run_excursion(model, x, rng, opts.max_excursion_steps);
  });
  return runs;
}

}  // namespace

OccupationRatioEstimate estimate_occupation_ratio(const Model& model, Height x0, std::size_t line,
                                                  std::size_t trials, const TrialOptions& opts) {
  check_trials(trials, "estimate_occupation_ratio");
  check_start(x0, "estimate_occupation_ratio");
  if (line >= model.lines().size()) {
    fail(ErrorCode::InvalidArgument, "estimate_occupation_ratio: line out of range");
  }
  const auto runs = run_excursions(model, x0, trials, opts);
  OccupationRatioEstimate out;
  std::vector<double> samples;
  samples.reserve(trials);
  for (const auto& r : runs) {
    samples.push_back(static_cast<double>(r.record.occupation[line]));
    out.boundary_hits += r.hit_zero;
    out.truncated += r.truncated;
  }
  out.estimate = MomentEstimate::from_samples(samples);
  return out;
}

EmbeddedMoments estimate_embedded_moments(const Model& model, Height x, std::size_t trials,
                                          const TrialOptions& opts) {
  check_trials(trials, "estimate_embedded_moments");
  if (x < 1) fail(ErrorCode::InvalidArgument, "estimate_embedded_moments: x must be >= 1");
  const auto runs = run_excursions(model, x, trials, opts);
  EmbeddedMoments out;
  std::vector<double> d1, d2, comp;
  d1.reserve(trials);
  d2.reserve(trials);
  comp.reserve(trials);
  for (const auto& r : runs) {
    const double dy = static_cast<double>(r.record.end_x - r.record.start_x);
    d1.push_back(dy);
    comp.push_back(r.drift_sum);
    d2.push_back(dy * dy);
    out.boundary_hits += r.hit_zero;
    out.truncated += r.truncated;
  }
  out.m1 = MomentEstimate::from_samples(d1);
  out.m2 = MomentEstimate::from_samples(d2);
  out.m1_compensator = MomentEstimate::from_samples(comp);
  return out;
}

LineFit fit_line(std::span<const double> t, std::span<const double> y) {
  LineFit f;
  f.points = t.size();
  if (t.size() != y.size() || t.size() < 2) {
    f.slope = f.intercept = f.r_squared = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  f.slope = sty / stt;
  f.intercept = my - f.slope * mt;
  f.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  return f;
}

TailProfile tau_tail_profile(const Model& model, Height x, std::size_t trials, std::size_t r_max,
                             const TrialOptions& opts) {
  check_trials(trials, "tau_tail_profile");
  check_start(x, "tau_tail_profile");
  const auto runs = run_excursions(model, x, trials, opts);
  std::vector<std::size_t> exceed(r_max + 1, 0);
  TailProfile out;
  for (const auto& r : runs) {
    out.boundary_hits += r.hit_zero;
    const std::size_t d = r.record.duration;
    for (std::size_t k = 0; k <= r_max && k < d; ++k) ++exceed[k];
  }
  const double threshold = 50.0 / static_cast<double>(trials);
  std::vector<double> t, y;
  for (std::size_t k = 0; k <= r_max; ++k) {
    const double s = static_cast<double>(exceed[k]) / static_cast<double>(trials);
    out.survival.emplace_back(k, s);
    if (s >= threshold && s > 0.0) {
      t.push_back(static_cast<double>(k));
      y.push_back(std::log(s));
    }
  }
  out.fit = fit_line(t, y);
  return out;
}

DeviationProfile max_deviation_profile(const Model& model, Height x, std::size_t trials,
                                       const std::vector<Height>& d_grid,
                                       const TrialOptions& opts) {
  check_trials(trials, "max_deviation_profile");
  check_start(x, "max_deviation_profile");
  const auto runs = run_excursions(model, x, trials, opts);
  DeviationProfile out;
  std::vector<Height> devs;
  devs.reserve(trials);
  for (const auto& r : runs) {
    devs.push_back(r.record.max_dev);
    out.boundary_hits += r.hit_zero;
    if (r.record.max_dev > static_cast<Height>(r.record.duration)) ++out.exceeds_duration;
  }
  std::sort(devs.begin(), devs.end());
  const double threshold = 50.0 / static_cast<double>(trials);
  std::vector<double> t, y;
  for (Height d : d_grid) {
    const auto below = std::lower_bound(devs.begin(), devs.end(), d) - devs.begin();
    const double p = static_cast<double>(devs.size() - static_cast<std::size_t>(below)) /
                     static_cast<double>(trials);
    out.tail.emplace_back(d, p);
    if (d > 0 && p >= threshold && p > 0.0) {
      t.push_back(std::log(static_cast<double>(d)));
      y.push_back(std::log(p));
    }
  }
  out.fit = fit_line(t, y);
  return out;
}

std::size_t renewal_count(const PathSample& path, std::size_t reference_line) {
  std::size_t visits = 0;
  for (const auto& s : path.states) visits += s.line == reference_line;
  return visits == 0 ? 0 : visits - 1;
}

MomentEstimate renewal_rate(const Model& model, State initial, std::size_t n, std::size_t trials,
                            const TrialOptions& opts) {
  check_trials(trials, "renewal_rate");
  if (n == 0) fail(ErrorCode::InvalidArgument, "renewal_rate: n must be >= 1");
  const std::size_t ref = model.lines().reference_line;
  std::vector<double> rates(trials);
  for_each_trial(trials, opts.jobs, [&](std::size_t t) {
    RandomStream rng(opts.seed, t);
    State s = initial;
    std::size_t visits = s.line == ref;
    for (std::size_t k = 0; k < n; ++k) {
      s = step(model, s, rng);
      visits += s.line == ref;
    }
    const std::size_t count = visits == 0 ? 0 : visits - 1;
    rates[t] = static_cast<double>(count) / static_cast<double>(n);
  });
  return MomentEstimate::from_samples(rates);
}

std::vector<std::pair<Height, MomentEstimate>> occupation_measure(
    const Model& model, State initial, std::size_t n, const std::vector<Height>& x_set,
    std::size_t trials, const TrialOptions& opts) {
  if (x_set.empty()) return {};
  check_trials(trials, "occupation_measure");
  if (n == 0) fail(ErrorCode::InvalidArgument, "occupation_measure: n must be >= 1");
  const Height x_max = *std::max_element(x_set.begin(), x_set.end());
  std::vector<std::vector<double>> freq(trials);
  for_each_trial(trials, opts.jobs, [&](std::size_t t) {
    RandomStream rng(opts.seed, t);
    std::vector<std::size_t> hits(static_cast<std::size_t>(std::max<Height>(x_max, 0)) + 1, 0);
    State s = initial;
    for (std::size_t k = 0; k < n; ++k) {
      if (s.x <= x_max) ++hits[static_cast<std::size_t>(s.x)];
      s = step(model, s, rng);
    }
    auto& out = freq[t];
    for (Height x : x_set) {
      out.push_back(x < 0 ? 0.0
                          : static_cast<double>(hits[static_cast<std::size_t>(x)]) /
                                static_cast<double>(n));
    }
  });
  std::vector<std::pair<Height, MomentEstimate>> out;
  std::vector<double> column(trials);
  for (std::size_t k = 0; k < x_set.size(); ++k) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = freq[t][k];
    out.emplace_back(x_set[k], MomentEstimate::from_samples(column));
  }
  return out;
}

}  // namespace halfstrip
