#include "halfstrip/classify.hpp"

#include <algorithm>
#include <cmath>

#include "halfstrip/error.hpp"

namespace halfstrip {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Transient: return "Transient";
    case Verdict::NullRecurrent: return "NullRecurrent";
    case Verdict::PositiveRecurrent: return "PositiveRecurrent";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

double ClassificationResult::value(std::string_view name) const {
  for (const auto& [k, v] : decision_values) {
    if (k == name) return v;
  }
  fail(ErrorCode::InvalidArgument, "no decision value named '" + std::string(name) + "'");
}

ClassificationResult classify_constant(const std::vector<double>& d,
                                       const StationaryDistribution& pi, double tol) {
  if (d.size() != pi.size()) fail(ErrorCode::InvalidArgument, "classify: dimension mismatch");
  double mean = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mean += d[i] * pi[i];
    scale += std::abs(d[i]) * pi[i];
  }
  ClassificationResult r;
  r.decision_values = {{"D", mean}};
  r.assumptions_used = {"Q_inf", "M_C"};
  const double band = tol * scale;
  if (mean > band) {
    r.verdict = Verdict::Transient;
  } else if (mean < -band) {
    r.verdict = Verdict::PositiveRecurrent;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
  return r;
}

ClassificationResult classify_lamperti(const DriftParams& params, const StationaryDistribution& pi,
                                       double tol) {
  const std::size_t n = pi.size();
  if (params.c.size() != n || params.s2.size() != n) {
    fail(ErrorCode::InvalidArgument, "classify: dimension mismatch");
  }
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += 2.0 * params.c[i] * pi[i];
    b += params.s2[i] * pi[i];
  }
  if (!(b > 0.0)) fail(ErrorCode::InvalidArgument, "classify: sum s_i^2 pi(i) must be positive");

  ClassificationResult r;
  r.decision_values = {{"A", a}, {"B", b}};
  r.assumptions_used = {"Q_inf", "M_L"};
  const double band = tol * b;
  if (a - b > band) {
    r.verdict = Verdict::Transient;
  } else if (a + b < -band) {
    r.verdict = Verdict::PositiveRecurrent;
  } else if (std::abs(std::abs(a) - b) <= band) {
    r.boundary = true;
    if (params.sharp) {
      r.verdict = Verdict::NullRecurrent;
      r.assumptions_used.push_back("Q_inf+");
      r.assumptions_used.push_back("M_L+");
    } else {
      r.verdict = Verdict::Inconclusive;
    }
  } else {
    r.verdict = Verdict::NullRecurrent;
  }
  return r;
}

DriftEstimate estimate_drift_params(const Model& model, const std::vector<Height>& grid,
                                    DriftMode mode) {
  validate_grid(grid);
  const std::size_t n = model.lines().size();
  DriftEstimate out;
  out.params.mode = mode;
  out.params.sharp = false;
  out.params.limit_q = limit_matrix(model, grid, false).q;

  std::vector<double> xs(grid.begin(), grid.end());
  std::vector<double> f1(grid.size()), f2(grid.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const TransitionRow row = model.row(grid[k], i);
      out.clamped_rows = out.clamped_rows || row.clamped;
      const double m1 = row.moment(grid[k], 1);
      f1[k] = mode == DriftMode::ConstantDrift ? m1 : xs[k] * m1;
      f2[k] = row.moment(grid[k], 2);
    }
    const Extrapolation e1 = extrapolate_limit(xs, f1);
    if (mode == DriftMode::ConstantDrift) {
      out.params.d.push_back(e1.value);
      out.residual_d.push_back(e1.spread);
    } else {
      const Extrapolation e2 = extrapolate_limit(xs, f2);
      out.params.c.push_back(e1.value);
      out.params.s2.push_back(std::max(0.0, e2.value));
      out.residual_c.push_back(e1.spread);
      out.residual_s2.push_back(e2.spread);
    }
  }
  auto worst = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  const double spread =
      std::max({worst(out.residual_d), worst(out.residual_c), worst(out.residual_s2)});
  if (spread > kDriftSpreadTolerance) {
    fail(ErrorCode::NonConvergent, "drift estimate: extrapolation spread " +
                                       std::to_string(spread) + " exceeds 1e-4");
  }
  return out;
}

ModelClassification classify_model(const Model& model, DriftMode mode,
                                   const std::vector<Height>& grid, bool force_estimate) {
  const auto& declared = model.declared_params();
  const bool declared_usable =
      declared && !force_estimate &&
      (mode == DriftMode::ConstantDrift ? declared->has_constant() : declared->has_lamperti());

  ModelClassification out;
  if (declared_usable) {
    out.params = *declared;
    out.params.mode = mode;
    out.q = declared->limit_q;
  } else {
    const LimitMatrixResult lm = limit_matrix(model, grid, false);
    DriftEstimate est = estimate_drift_params(model, grid, mode);
    out.params = std::move(est.params);
    out.q = lm.q;
    out.limit_spread = lm.spread;
    out.estimated = true;
    for (const auto* v : {&est.residual_d, &est.residual_c, &est.residual_s2}) {
      out.residuals.insert(out.residuals.end(), v->begin(), v->end());
    }
  }
  out.pi = stationary_distribution(out.q);
  // Estimated constants carry extrapolation error; a decision value inside
  // that error band is treated as a boundary case.
  double tol = kDecisionTolerance;
  if (out.estimated) {
    const double worst =
        out.residuals.empty() ? 0.0 : *std::max_element(out.residuals.begin(), out.residuals.end());
    tol = std::max(tol, kEstimatedDecisionFloor + 4.0 * worst);
  }
  out.result = mode == DriftMode::ConstantDrift ? classify_constant(out.params.d, out.pi, tol)
                                                : classify_lamperti(out.params, out.pi, tol);
  return out;
}

}  // namespace halfstrip
