#include "halfstrip/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "halfstrip/error.hpp"

namespace halfstrip {

namespace {

void check_probability_vector(std::span<const double> p, const char* name) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorCode::InvalidArgument, std::string("coupling: ") + name + " has an entry outside [0,1]");
    }
    s += v;
  }
  if (std::abs(s - 1.0) > kRowTolerance) {
    fail(ErrorCode::InvalidArgument, std::string("coupling: ") + name + " does not sum to 1");
  }
}

std::size_t sample_index(std::span<const double> p, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    last = k;
    acc += p[k];
    if (u < acc) return k;
  }
  return last;
}

}  // namespace

std::vector<double> CouplingJointRow::marginal_first() const {
  std::vector<double> m(lines, 0.0);
  for (const auto& e : entries) m[e.j] += e.probability;
  return m;
}

std::vector<double> CouplingJointRow::marginal_second() const {
  std::vector<double> m(lines, 0.0);
  for (const auto& e : entries) m[e.k] += e.probability;
  return m;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorCode::InvalidArgument, "total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

CouplingJointRow coupling_joint_row(std::span<const double> qx_row, std::span<const double> q_row) {
  if (qx_row.size() != q_row.size() || qx_row.empty()) {
    fail(ErrorCode::InvalidArgument, "coupling: rows must be non-empty and of equal length");
  }
  check_probability_vector(qx_row, "q_x row");
  check_probability_vector(q_row, "q row");
  const std::size_t n = qx_row.size();
  CouplingJointRow out;
  out.lines = n;
  const double tv = total_variation(qx_row, q_row);
  for (std::size_t j = 0; j < n; ++j) {
    const double diag = std::min(qx_row[j], q_row[j]);
    if (diag > 0.0) out.entries.push_back({j, j, diag});
  }
  if (tv < kCouplingDegenerateTv) return out;
  out.decoupling_mass = tv;
  for (std::size_t j = 0; j < n; ++j) {
    const double excess = std::max(qx_row[j] - q_row[j], 0.0);
    if (excess <= 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double deficit = std::max(q_row[k] - qx_row[k], 0.0);
      if (deficit > 0.0) out.entries.push_back({j, k, excess * deficit / tv});
    }
  }
  return out;
}

CoupledState coupled_step(const Model& model, const ModulationMatrix& q, const CoupledState& state,
                          RandomStream& rng) {
  const std::size_t n = model.lines().size();
  if (q.size() != n || state.line >= n || state.star_line >= n || state.x < 0) {
    fail(ErrorCode::InvalidArgument, "coupled_step: invalid state or matrix");
  }
  if (state.coupled && state.line != state.star_line) {
    fail(ErrorCode::InvalidArgument, "coupled_step: coupled state with eta != eta*");
  }
  const TransitionRow row = model.row(state.x, state.line);
  CoupledState next;
  if (!state.coupled) {
    const State s = sample_transition(row, rng.uniform());
    next.x = s.x;
    next.line = s.line;
    next.star_line = sample_index(q.row(state.star_line), rng.uniform());
    next.coupled = false;
    return next;
  }
  std::vector<double> qx(n, 0.0);
  for (const auto& e : row.entries) qx[e.line] += e.probability;
  const CouplingJointRow joint = coupling_joint_row(qx, q.row(state.line));
  std::vector<double> weights;
  weights.reserve(joint.entries.size());
  for (const auto& e : joint.entries) weights.push_back(e.probability);
  const JointEntry& pick = joint.entries[sample_index(weights, rng.uniform())];

  // X_{n+1} given eta_{n+1} = j: p(x,i,y,j) / q_x(i,j).
  TransitionRow conditional;
  for (const auto& e : row.entries) {
    if (e.line == pick.j) conditional.entries.push_back({e.x, e.line, e.probability / qx[pick.j]});
  }
  const State s = sample_transition(conditional, rng.uniform());
  next.x = s.x;
  next.line = pick.j;
  next.star_line = pick.k;
  next.coupled = pick.j == pick.k;
  return next;
}

CouplingSurvival coupling_survival(const Model& model, const ModulationMatrix& q, Height x0,
                                   std::size_t line, std::size_t horizon, std::size_t trials,
                                   const TrialOptions& opts) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "coupling_survival: trials must be >= 1");
  if (x0 < 0 || line >= model.lines().size()) {
    fail(ErrorCode::InvalidArgument, "coupling_survival: invalid start");
  }
  // Number of steps each trial stayed coupled, capped at horizon.
  std::vector<std::size_t> lifetime(trials, 0);
  for_each_trial(trials, opts.jobs, [&](std::size_t t) {
    RandomStream rng(opts.seed, t);
    CoupledState s{x0, line, line, true};
    std::size_t n = 0;
    while (n < horizon) {
      s = coupled_step(model, q, s, rng);
      if (!s.coupled) break;
      ++n;
    }
    lifetime[t] = n;
  });
  CouplingSurvival out;
  out.trials = trials;
  for (std::size_t n = 0; n <= horizon; ++n) {
    const auto alive = std::count_if(lifetime.begin(), lifetime.end(),
                                     [n](std::size_t life) { return life >= n; });
    out.survival.emplace_back(n, static_cast<double>(alive) / static_cast<double>(trials));
  }
  return out;
}

double decoupling_bound(const Model& model, const ModulationMatrix& q, Height x) {
  const ModulationMatrix qx = q_at(model, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < qx.size(); ++i) {
    worst = std::max(worst, total_variation(qx.row(i), q.row(i)));
  }
  return worst;
}

double horizon_decoupling_bound(const Model& model, const ModulationMatrix& q, Height x,
                                std::size_t horizon) {
  return static_cast<double>(horizon) * decoupling_bound(model, q, x);
}

std::size_t log_horizon(double a, Height x0) {
  if (!(a > 0.0) || x0 < 2) fail(ErrorCode::InvalidArgument, "log_horizon: need A > 0, x0 >= 2");
  return static_cast<std::size_t>(std::ceil(a * std::log(static_cast<double>(x0))));
}

}  // namespace halfstrip
