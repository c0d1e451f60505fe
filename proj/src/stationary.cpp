#include "halfstrip/stationary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "halfstrip/error.hpp"

namespace halfstrip {

void StationaryDistribution::validate(std::size_t n) const {
  if (pi.size() != n) fail(ErrorCode::Validation, "stationary distribution: wrong size");
  double s = 0.0;
  for (double v : pi) {
    if (!(v > 0.0)) fail(ErrorCode::Validation, "stationary distribution: non-positive entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kRowTolerance) {
    fail(ErrorCode::Validation, "stationary distribution: does not sum to 1");
  }
}

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency support_graph(const ModulationMatrix& q) {
  const std::size_t n = q.size();
  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (q(i, j) > kZeroThreshold) adj[i].push_back(j);
    }
  }
  return adj;
}

// Tarjan's algorithm, iterative. Returns the component id of every vertex.
std::vector<std::size_t> strong_components(const Adjacency& adj, std::size_t& count) {
  const std::size_t n = adj.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  count = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      if (edge < adj[v].size()) {
        const std::size_t w = adj[v][edge++];
        if (index[w] == unset) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) {
        auto& parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

// gcd of (level[u] + 1 - level[v]) over edges inside one component.
std::size_t component_period(const Adjacency& adj, const std::vector<std::size_t>& comp,
                             std::size_t id) {
  const std::size_t n = adj.size();
  constexpr long unset = -1;
  std::vector<long> level(n, unset);
  std::size_t root = 0;
  while (comp[root] != id) ++root;
  level[root] = 0;
  std::queue<std::size_t> frontier;
  frontier.push(root);
  std::size_t g = 0;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adj[u]) {
      if (comp[v] != id) continue;
      if (level[v] == unset) {
        level[v] = level[u] + 1;
        frontier.push(v);
      } else {
        const long diff = std::abs(level[u] + 1 - level[v]);
        g = std::gcd(g, static_cast<std::size_t>(diff));
      }
    }
  }
  return g;
}

}  // namespace

bool is_irreducible(const ModulationMatrix& q) {
  if (q.size() == 0) return false;
  std::size_t count = 0;
  strong_components(support_graph(q), count);
  return count == 1;
}

std::size_t period(const ModulationMatrix& q) {
  const Adjacency adj = support_graph(q);
  std::size_t count = 0;
  const auto comp = strong_components(adj, count);
  if (count != 1) fail(ErrorCode::NotIrreducible, "period: matrix is not irreducible");
  return component_period(adj, comp, 0);
}

bool is_aperiodic(const ModulationMatrix& q) {
  const Adjacency adj = support_graph(q);
  std::size_t count = 0;
  const auto comp = strong_components(adj, count);
  for (std::size_t id = 0; id < count; ++id) {
    const std::size_t g = component_period(adj, comp, id);
    // g == 0: a single state without a self-loop carries no cycle at all.
    if (g != 1 && g != 0) return false;
  }
  return true;
}

StationaryDistribution stationary_distribution(const ModulationMatrix& q) {
  const std::size_t n = q.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "stationary distribution: empty matrix");
  if (!is_irreducible(q)) {
    fail(ErrorCode::NotIrreducible, "stationary distribution: q is not irreducible");
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd system(ni + 1, ni);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      system(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          q(i, j) - (i == j ? 1.0 : 0.0);
    }
  }
  system.row(ni).setOnes();
  rhs(ni) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
  qr.setThreshold(1e-12);
  if (qr.rank() < ni) {
    fail(ErrorCode::SingularSystem, "stationary distribution: rank-deficient balance system");
  }
  Eigen::VectorXd x = qr.solve(rhs);
  // One step of iterative refinement.
  x += qr.solve(rhs - system * x);

  StationaryDistribution out;
  out.pi.assign(x.data(), x.data() + n);
  for (double& v : out.pi) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
  }
  const double s = std::accumulate(out.pi.begin(), out.pi.end(), 0.0);
  for (double& v : out.pi) v /= s;
  if (std::any_of(out.pi.begin(), out.pi.end(), [](double v) { return !(v > 0.0); })) {
    fail(ErrorCode::SingularSystem, "stationary distribution: non-positive component");
  }
  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += out.pi[i] * q(i, j);
    residual = std::max(residual, std::abs(acc - out.pi[j]));
  }
  if (residual > 1e-10) {
    fail(ErrorCode::SingularSystem, "stationary distribution: residual above 1e-10");
  }
  return out;
}

// ----------------------------------------------------------- extrapolation

namespace {

struct TripleFit {
  double value;
  double residual_step;  // |f3 - f2|
  bool fallback;
};

TripleFit fit_triple(double x1, double x2, double x3, double f1, double f2, double f3) {
  const double d1 = f1 - f2;
  const double d2 = f2 - f3;
  const double scale = std::max({std::abs(f1), std::abs(f2), std::abs(f3), 1.0});
  const double eps = 1e-15 * scale;
  if (std::abs(d1) <= eps && std::abs(d2) <= eps) return {f3, std::abs(d2), false};
  if (d1 == 0.0 || d1 * d2 < 0.0 || std::abs(d2) >= std::abs(d1)) {
    return {f3, std::abs(d2), true};
  }
  const double ratio = d2 / d1;
  const double r21 = x2 / x1;
  const double r31 = x3 / x1;
  auto g = [&](double beta) {
    const double t2 = std::pow(r21, -beta);
    const double t3 = std::pow(r31, -beta);
    return (t2 - t3) / (1.0 - t2);
  };
  const double g0 = std::log(x3 / x2) / std::log(x2 / x1);
  if (ratio >= g0) return {f3, std::abs(d2), true};
  double lo = 1e-12, hi = 1.0;
  while (g(hi) > ratio && hi < 1e3) hi *= 2.0;
  if (g(hi) > ratio) return {f3, std::abs(d2), true};
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > ratio) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double beta = 0.5 * (lo + hi);
  const double t2 = std::pow(r21, -beta);
  const double t3 = std::pow(r31, -beta);
  const double amp = d1 / (1.0 - t2);  // coefficient of (x/x1)^{-beta}
  return {f3 - amp * t3, std::abs(d2), false};
}

}  // namespace

Extrapolation extrapolate_limit(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.size() != values.size() || grid.size() < 2) {
    fail(ErrorCode::InvalidArgument, "extrapolation needs at least two grid points");
  }
  const std::size_t n = grid.size();
  if (n == 2) return {values[1], std::abs(values[1] - values[0]), true};
  Extrapolation out;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  double fallback_step = 0.0;
  for (std::size_t k = std::max<std::size_t>(2, n / 2); k < n; ++k) {
    const TripleFit f = fit_triple(grid[k - 2], grid[k - 1], grid[k], values[k - 2],
                                   values[k - 1], values[k]);
    if (first) {
      lo = hi = f.value;
      first = false;
    } else {
      lo = std::min(lo, f.value);
      hi = std::max(hi, f.value);
    }
    if (f.fallback) {
      out.fallback = true;
      fallback_step = std::max(fallback_step, f.residual_step);
    }
    out.value = f.value;
  }
  out.spread = std::max(hi - lo, fallback_step);
  return out;
}

void validate_grid(const std::vector<Height>& grid) {
  if (grid.size() < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] <= 0) fail(ErrorCode::InvalidArgument, "grid points must be positive");
    if (k > 0 && grid[k] <= grid[k - 1]) {
      fail(ErrorCode::InvalidArgument, "grid must be strictly increasing");
    }
  }
}

LimitMatrixResult limit_matrix(const Model& model, const std::vector<Height>& grid,
                               bool use_declared) {
  validate_grid(grid);
  if (use_declared && model.declared_params()) {
    return {model.declared_params()->limit_q, 0.0, true, false};
  }
  const std::size_t n = model.lines().size();
  std::vector<ModulationMatrix> samples;
  samples.reserve(grid.size());
  for (Height x : grid) samples.push_back(q_at(model, x));
  std::vector<double> xs(grid.begin(), grid.end());

  LimitMatrixResult out{ModulationMatrix(n), 0.0, false, false};
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < grid.size(); ++k) f[k] = samples[k](i, j);
      const Extrapolation e = extrapolate_limit(xs, f);
      out.q(i, j) = std::clamp(e.value, 0.0, 1.0);
      out.spread = std::max(out.spread, e.spread);
      out.fallback = out.fallback || e.fallback;
    }
    const double s = std::accumulate(out.q.row(i).begin(), out.q.row(i).end(), 0.0);
    for (double& v : out.q.row(i)) v /= s;
  }
  if (out.spread > kLimitSpreadTolerance) {
    fail(ErrorCode::NonConvergent,
         "limit matrix: extrapolation spread " + std::to_string(out.spread) +
             " exceeds 1e-6 (q_x may have no limit)");
  }
  return out;
}

}  // namespace halfstrip
