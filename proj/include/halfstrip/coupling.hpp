#pragma once

// Maximal coupling of the modulating coordinate with the limiting chain q:
// the triple chain (X_n, eta_n, eta*_n).

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "halfstrip/model.hpp"
#include "halfstrip/rng.hpp"
#include "halfstrip/simulate.hpp"

namespace halfstrip {

struct CoupledState {
  Height x = 0;
  std::size_t line = 0;
  std::size_t star_line = 0;
  /// eta == eta* so far; once false it stays false.
  bool coupled = true;

  bool operator==(const CoupledState&) const = default;
};

struct JointEntry {
  std::size_t j = 0;  // next eta
  std::size_t k = 0;  // next eta*
  double probability = 0.0;
};

struct CouplingJointRow {
  std::size_t lines = 0;
  std::vector<JointEntry> entries;
  /// Probability that the two coordinates disagree after the step; equals
  /// the total-variation distance between the rows.
  double decoupling_mass = 0.0;

  /// Marginal over k (the law of eta) or over j (the law of eta*).
  std::vector<double> marginal_first() const;
  std::vector<double> marginal_second() const;
};

/// Below this total variation the rows are considered identical.
inline constexpr double kCouplingDegenerateTv = 1e-14;

double total_variation(std::span<const double> p, std::span<const double> q);

/// Maximal coupling of q_x(i,.) (first coordinate) and q(i,.) (second).
CouplingJointRow coupling_joint_row(std::span<const double> qx_row, std::span<const double> q_row);

/// One transition of the triple chain.
CoupledState coupled_step(const Model& model, const ModulationMatrix& q, const CoupledState& state,
                          RandomStream& rng);

struct CouplingSurvival {
  /// (n, empirical P[eta_k = eta*_k for all k <= n]) for n = 0..horizon.
  std::vector<std::pair<std::size_t, double>> survival;
  std::size_t trials = 0;
};

CouplingSurvival coupling_survival(const Model& model, const ModulationMatrix& q, Height x0,
                                   std::size_t line, std::size_t horizon, std::size_t trials,
                                   const TrialOptions& opts);

/// Per-step decoupling bound: max_i TV(q_x(i,.), q(i,.)).
double decoupling_bound(const Model& model, const ModulationMatrix& q, Height x);

/// Union bound on breaking within `horizon` steps when X stays above x:
/// horizon * decoupling_bound(x).
double horizon_decoupling_bound(const Model& model, const ModulationMatrix& q, Height x,
                                std::size_t horizon);

/// ceil(A log x0), the logarithmic coupling horizon.
std::size_t log_horizon(double a, Height x0);

}  // namespace halfstrip
