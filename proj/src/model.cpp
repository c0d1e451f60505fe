#include "halfstrip/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "halfstrip/error.hpp"

namespace halfstrip {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoReturn: return "NoReturn";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- LineSet

std::optional<std::size_t> LineSet::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

void LineSet::validate() const {
  if (labels.empty()) fail(ErrorCode::Validation, "line set is empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      fail(ErrorCode::Validation, "duplicate line label '" + l + "'");
    }
  }
  if (reference_line >= labels.size()) {
    fail(ErrorCode::Validation, "reference line index out of range");
  }
}

// ---------------------------------------------------------- TransitionRow

double TransitionRow::total() const noexcept {
  double s = 0.0;
  for (const auto& e : entries) s += e.probability;
  return s;
}

void TransitionRow::sort() {
  std::sort(entries.begin(), entries.end(), [](const Transition& a, const Transition& b) {
    return a.x != b.x ? a.x < b.x : a.line < b.line;
  });
}

void TransitionRow::validate(const LineSet& lines, std::string_view where) const {
  auto prefix = [&] {
    return where.empty() ? std::string("row") : std::string(where);
  };
  if (entries.empty()) fail(ErrorCode::Validation, prefix() + ": empty row");
  std::set<std::pair<Height, std::size_t>> seen;
  for (const auto& e : entries) {
    if (e.x < 0) fail(ErrorCode::Validation, prefix() + ": negative target height");
    if (e.line >= lines.size()) {
      fail(ErrorCode::Validation, prefix() + ": target line out of range");
    }
    if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
      fail(ErrorCode::Validation, prefix() + ": probability outside [0,1]");
    }
    if (!seen.insert({e.x, e.line}).second) {
      fail(ErrorCode::Validation, prefix() + ": duplicate target");
    }
  }
  const double t = total();
  if (std::abs(t - 1.0) > kRowTolerance) {
    std::ostringstream os;
    os.precision(15);
    os << prefix() << ": probabilities sum to " << t;
    fail(ErrorCode::Validation, os.str());
  }
}

double TransitionRow::moment(Height x, int k) const noexcept {
  double m = 0.0;
  for (const auto& e : entries) {
    m += std::pow(static_cast<double>(e.x - x), k) * e.probability;
  }
  return m;
}

// ------------------------------------------------------- ModulationMatrix

ModulationMatrix::ModulationMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()), data_() {
  data_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) fail(ErrorCode::Validation, "matrix is not square");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ModulationMatrix ModulationMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  ModulationMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) fail(ErrorCode::Validation, "matrix is not square");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::vector<double>> ModulationMatrix::to_rows() const {
  std::vector<std::vector<double>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

void ModulationMatrix::validate_stochastic(std::string_view name, double tol) const {
  if (n_ == 0) fail(ErrorCode::Validation, std::string(name) + ": empty matrix");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::Validation, std::string(name) + ": row " + std::to_string(i) +
                                        " has an entry outside [0,1]");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > tol) {
      std::ostringstream os;
      os.precision(15);
      os << name << ": row " << i << " sums to " << s;
      fail(ErrorCode::Validation, os.str());
    }
  }
}

double ModulationMatrix::max_abs_diff(const ModulationMatrix& other) const {
  if (other.n_ != n_) fail(ErrorCode::InvalidArgument, "matrix dimension mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k) {
    m = std::max(m, std::abs(data_[k] - other.data_[k]));
  }
  return m;
}

// ------------------------------------------------------------ DriftParams

std::string_view to_string(DriftMode mode) noexcept {
  return mode == DriftMode::ConstantDrift ? "constant" : "lamperti";
}

std::optional<DriftMode> parse_drift_mode(std::string_view text) noexcept {
  if (text == "constant") return DriftMode::ConstantDrift;
  if (text == "lamperti") return DriftMode::Lamperti;
  return std::nullopt;
}

void DriftParams::validate(std::size_t lines) const {
  auto check = [&](const std::vector<double>& v, const char* name) {
    if (!v.empty() && v.size() != lines) {
      fail(ErrorCode::Validation, std::string("drift params: ") + name +
                                      " has the wrong number of lines");
    }
  };
  check(d, "d");
  check(c, "c");
  check(s2, "s2");
  if (limit_q.size() != lines) fail(ErrorCode::Validation, "drift params: limit_q size");
  limit_q.validate_stochastic("limit_q");
  for (double v : s2) {
    if (v < 0.0) fail(ErrorCode::Validation, "drift params: negative s2");
  }
  if (mode == DriftMode::Lamperti && has_lamperti() &&
      std::none_of(s2.begin(), s2.end(), [](double v) { return v > 0.0; })) {
    fail(ErrorCode::Validation, "drift params: Lamperti mode needs some s2 > 0");
  }
}

// ------------------------------------------------------------------ Model

Model::Model(LineSet lines, std::optional<DriftParams> declared)
    : lines_(std::move(lines)), declared_(std::move(declared)) {
  lines_.validate();
  if (declared_) declared_->validate(lines_.size());
}

namespace {

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

void check_line(const Model& m, std::size_t line) {
  if (line >= m.lines().size()) fail(ErrorCode::InvalidArgument, "line index out of range");
}

class ModulatedQueue final : public Model {
 public:
  ModulatedQueue(LineSet lines, std::optional<DriftParams> declared, ModulationMatrix a,
                 ModulationMatrix b, std::vector<double> c)
      : Model(std::move(lines), std::move(declared)),
        a_(std::move(a)),
        b_(std::move(b)),
        c_(std::move(c)) {}

  std::string_view kind() const noexcept override { return "modulated_queue"; }

  TransitionRow row(Height x, std::size_t i) const override {
    check_line(*this, i);
    if (x < 0) fail(ErrorCode::InvalidArgument, "negative height");
    const std::size_t n = lines().size();
    TransitionRow r;
    if (x == 0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (a_(i, j) > 0.0) r.entries.push_back({1, j, a_(i, j)});
      }
      return r;
    }
    double ratio = c_[i] / static_cast<double>(x);
    if (ratio >= 0.5) {
      ratio = 0.25;
      r.clamped = true;
    }
    const double up = 1.0 / (2.0 * (1.0 - ratio));
    const double down = (1.0 - 2.0 * ratio) / (2.0 * (1.0 - ratio));
    for (std::size_t j = 0; j < n; ++j) {
      if (b_(i, j) > 0.0) r.entries.push_back({x - 1, j, down * b_(i, j)});
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (a_(i, j) > 0.0) r.entries.push_back({x + 1, j, up * a_(i, j)});
    }
    return r;
  }

 private:
  ModulationMatrix a_, b_;
  std::vector<double> c_;
};

class CorrelatedWalk final : public Model {
 public:
  CorrelatedWalk(LineSet lines, DriftParams declared, double c, CorrelationCorrection corr)
      : Model(std::move(lines), std::move(declared)), c_(c), corr_(std::move(corr)) {}

  std::string_view kind() const noexcept override { return "correlated_walk"; }

  TransitionRow row(Height x, std::size_t line) const override {
    check_line(*this, line);
    if (x < 0) fail(ErrorCode::InvalidArgument, "negative height");
    TransitionRow r;
    if (x == 0) {
      r.entries = {{1, 0, 0.5}, {1, 1, 0.5}};
      return r;
    }
    const int sign = line == 0 ? 1 : -1;
    double stay = 0.5 + sign * c_ / (2.0 * static_cast<double>(x));
    if (corr_) stay += corr_(x, sign);
    if (stay < 0.0 || stay > 1.0) {
      stay = std::clamp(stay, 0.0, 1.0);
      r.clamped = true;
    }
    const double turn = 1.0 - stay;
    // Moving in direction j lands on line j.
    const std::size_t other = 1 - line;
    const Height stay_x = x + sign;
    const Height turn_x = x - sign;
    if (stay > 0.0) r.entries.push_back({stay_x, line, stay});
    if (turn > 0.0) r.entries.push_back({turn_x, other, turn});
    r.sort();
    return r;
  }

 private:
  double c_;
  CorrelationCorrection corr_;
};

class HomogeneousStrip final : public Model {
 public:
  HomogeneousStrip(LineSet lines, std::optional<DriftParams> declared,
                   std::vector<std::vector<Increment>> inc, Height x0, RowTable boundary)
      : Model(std::move(lines), std::move(declared)),
        inc_(std::move(inc)),
        x0_(x0),
        boundary_(std::move(boundary)) {}

  std::string_view kind() const noexcept override { return "homogeneous_strip"; }

  TransitionRow row(Height x, std::size_t line) const override {
    check_line(*this, line);
    if (x < 0) fail(ErrorCode::InvalidArgument, "negative height");
    if (x < x0_) return boundary_.at(State{x, line});
    TransitionRow r;
    for (const auto& e : inc_[line]) {
      if (e.probability > 0.0) r.entries.push_back({x + e.z, e.to_line, e.probability});
    }
    r.sort();
    return r;
  }

 private:
  std::vector<std::vector<Increment>> inc_;
  Height x0_;
  RowTable boundary_;
};

class Tabular final : public Model {
 public:
  Tabular(RowTable rows, ModelPtr tail)
      : Model(tail->lines(), tail->declared_params()),
        rows_(std::move(rows)),
        tail_(std::move(tail)) {}

  std::string_view kind() const noexcept override { return "tabular"; }

  TransitionRow row(Height x, std::size_t line) const override {
    if (auto it = rows_.find(State{x, line}); it != rows_.end()) return it->second;
    return tail_->row(x, line);
  }

 private:
  RowTable rows_;
  ModelPtr tail_;
};

class Callback final : public Model {
 public:
  Callback(LineSet lines, RowFunction fn, std::optional<DriftParams> declared, std::string kind)
      : Model(std::move(lines), std::move(declared)), fn_(std::move(fn)), kind_(std::move(kind)) {}

  std::string_view kind() const noexcept override { return kind_; }

  TransitionRow row(Height x, std::size_t line) const override {
    check_line(*this, line);
    TransitionRow r = fn_(x, line);
    r.sort();
    r.validate(lines(), "callback row");
    return r;
  }

 private:
  RowFunction fn_;
  std::string kind_;
};

std::string row_name(const State& s) {
  return "row (x=" + std::to_string(s.x) + ", line=" + std::to_string(s.line) + ")";
}

}  // namespace

ModelPtr modulated_queue_model(const ModulationMatrix& a, const ModulationMatrix& b,
                               std::vector<double> c, const ModulatedQueueOptions& options,
                               std::vector<std::string> labels) {
  const std::size_t n = c.size();
  if (n == 0) fail(ErrorCode::Validation, "modulated queue: no lines");
  if (a.size() != n || b.size() != n) {
    fail(ErrorCode::Validation, "modulated queue: a, b and c disagree on |S|");
  }
  a.validate_stochastic("a");
  b.validate_stochastic("b");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(c[i])) fail(ErrorCode::Validation, "modulated queue: non-finite c");
    if (!options.allow_large_drift && std::abs(c[i]) >= 0.5) {
      fail(ErrorCode::Validation,
           "modulated queue: |c[" + std::to_string(i) + "]| must be < 1/2");
    }
  }
  LineSet lines{labels.empty() ? default_labels(n) : std::move(labels), options.reference_line};
  if (lines.size() != n) fail(ErrorCode::Validation, "modulated queue: label count");

  DriftParams p;
  p.mode = DriftMode::Lamperti;
  p.sharp = options.sharp;
  p.c = c;
  p.s2.assign(n, 1.0);
  p.d.assign(n, 0.0);
  p.limit_q = ModulationMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.limit_q(i, j) = 0.5 * (a(i, j) + b(i, j));
  }
  return std::make_shared<ModulatedQueue>(std::move(lines), std::move(p), a, b, std::move(c));
}

ModelPtr correlated_walk_model(double c, CorrelationCorrection correction, bool sharp) {
  if (!std::isfinite(c)) fail(ErrorCode::Validation, "correlated walk: non-finite c");
  DriftParams p;
  p.mode = DriftMode::Lamperti;
  p.sharp = sharp;
  p.c = {c, c};
  p.s2 = {1.0, 1.0};
  p.d = {0.0, 0.0};
  p.limit_q = ModulationMatrix{{0.5, 0.5}, {0.5, 0.5}};
  return std::make_shared<CorrelatedWalk>(LineSet{{"+1", "-1"}, 0}, std::move(p), c,
                                          std::move(correction));
}

ModelPtr homogeneous_strip_model(LineSet lines, std::vector<std::vector<Increment>> increments,
                                 Height x0, RowTable boundary, bool sharp) {
  lines.validate();
  const std::size_t n = lines.size();
  if (x0 < 0) fail(ErrorCode::Validation, "homogeneous strip: x0 must be >= 0");
  if (increments.size() != n) {
    fail(ErrorCode::Validation, "homogeneous strip: need one increment list per line");
  }
  DriftParams p;
  p.limit_q = ModulationMatrix(n);
  p.d.assign(n, 0.0);
  std::vector<double> m2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "homogeneous strip: increments of line '" + lines.labels[i] + "'";
    std::set<std::pair<Height, std::size_t>> seen;
    double total = 0.0;
    for (const auto& e : increments[i]) {
      if (e.z < -x0) {
        fail(ErrorCode::Validation, where + ": increment " + std::to_string(e.z) +
                                        " is below -x0 = " + std::to_string(-x0));
      }
      if (e.to_line >= n) fail(ErrorCode::Validation, where + ": target line out of range");
      if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
        fail(ErrorCode::Validation, where + ": probability outside [0,1]");
      }
      if (!seen.insert({e.z, e.to_line}).second) {
        fail(ErrorCode::Validation, where + ": duplicate (z, line)");
      }
      total += e.probability;
      p.limit_q(i, e.to_line) += e.probability;
      p.d[i] += static_cast<double>(e.z) * e.probability;
      m2[i] += static_cast<double>(e.z) * static_cast<double>(e.z) * e.probability;
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
      fail(ErrorCode::Validation, where + ": probabilities do not sum to 1");
    }
  }
  for (auto& [state, row] : boundary) {
    if (state.x < 0 || state.line >= n) {
      fail(ErrorCode::Validation, "homogeneous strip: boundary row key out of range");
    }
    row.sort();
    row.validate(lines, "homogeneous strip: boundary " + row_name(state));
  }
  for (Height x = 0; x < x0; ++x) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!boundary.contains(State{x, i})) {
        fail(ErrorCode::Validation,
             "homogeneous strip: missing boundary " + row_name(State{x, i}));
      }
    }
  }
  const bool driftless = std::all_of(p.d.begin(), p.d.end(), [](double v) { return v == 0.0; });
  p.mode = driftless ? DriftMode::Lamperti : DriftMode::ConstantDrift;
  p.sharp = sharp;
  if (driftless && std::any_of(m2.begin(), m2.end(), [](double v) { return v > 0.0; })) {
    p.c.assign(n, 0.0);
    p.s2 = m2;
  }
  return std::make_shared<HomogeneousStrip>(std::move(lines), std::move(p),
                                            std::move(increments), x0, std::move(boundary));
}

ModelPtr tabular_model(RowTable rows, ModelPtr tail) {
  if (!tail) fail(ErrorCode::InvalidArgument, "tabular model: missing tail");
  const auto& lines = tail->lines();
  for (auto& [state, row] : rows) {
    if (state.x < 0 || state.line >= lines.size()) {
      fail(ErrorCode::Validation, "tabular model: row key out of range");
    }
    row.sort();
    row.validate(lines, "tabular model: " + row_name(state));
  }
  return std::make_shared<Tabular>(std::move(rows), std::move(tail));
}

ModelPtr callback_model(LineSet lines, RowFunction rows, std::optional<DriftParams> declared,
                        std::string kind) {
  if (!rows) fail(ErrorCode::InvalidArgument, "callback model: empty row function");
  return std::make_shared<Callback>(std::move(lines), std::move(rows), std::move(declared),
                                    std::move(kind));
}

ModulationMatrix q_at(const Model& model, Height x) {
  if (x < 0) fail(ErrorCode::InvalidArgument, "q_at: negative height");
  const std::size_t n = model.lines().size();
  ModulationMatrix q(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : model.row(x, i).entries) q(i, e.line) += e.probability;
  }
  return q;
}

RowMoments row_moments(const Model& model, Height x, std::size_t line) {
  const TransitionRow r = model.row(x, line);
  return {r.moment(x, 1), r.moment(x, 2)};
}

void validate_rows(const Model& model, Height x_max) {
  for (Height x = 0; x <= x_max; ++x) {
    for (std::size_t i = 0; i < model.lines().size(); ++i) {
      model.row(x, i).validate(model.lines(), row_name(State{x, i}));
    }
  }
}

}  // namespace halfstrip
