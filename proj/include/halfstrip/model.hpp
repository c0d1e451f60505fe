#pragma once

// State space, transition kernels and the built-in model families on the
// half-strip Z+ x S.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace halfstrip {

using Height = std::int64_t;

/// Row-sum / normalization tolerance shared by all kernel validation.
inline constexpr double kRowTolerance = 1e-12;

/// The finite label set S, in declaration order, plus the line that anchors
/// excursions.
struct LineSet {
  std::vector<std::string> labels;
  std::size_t reference_line = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;
  void validate() const;

  bool operator==(const LineSet&) const = default;
};

struct State {
  Height x = 0;
  std::size_t line = 0;

  auto operator<=>(const State&) const = default;
};

struct Transition {
  Height x = 0;
  std::size_t line = 0;
  double probability = 0.0;

  bool operator==(const Transition&) const = default;
};

/// Law of one step from a fixed (x, line). Entries are kept sorted by
/// (x, line) so that inverse-CDF sampling is deterministic.
struct TransitionRow {
  std::vector<Transition> entries;
  /// Set when the model had to clamp probabilities to build this row.
  bool clamped = false;

  double total() const noexcept;
  void sort();
  /// Throws Validation on a bad row; `where` prefixes the message.
  void validate(const LineSet& lines, std::string_view where = {}) const;

  /// Exact k-th moment of the X displacement from height x.
  double moment(Height x, int k) const noexcept;

  bool operator==(const TransitionRow&) const = default;
};

/// Square row-stochastic matrix over S, row-major.
class ModulationMatrix {
 public:
  ModulationMatrix() = default;
  explicit ModulationMatrix(std::size_t n, double fill = 0.0)
      : n_(n), data_(n * n, fill) {}
  ModulationMatrix(std::initializer_list<std::initializer_list<double>> rows);
  static ModulationMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::vector<std::vector<double>> to_rows() const;

  /// Throws Validation unless entries lie in [0,1] and rows sum to 1.
  void validate_stochastic(std::string_view name = "matrix",
                           double tol = kRowTolerance) const;
  double max_abs_diff(const ModulationMatrix& other) const;

  bool operator==(const ModulationMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class DriftMode { ConstantDrift, Lamperti };

std::string_view to_string(DriftMode mode) noexcept;
std::optional<DriftMode> parse_drift_mode(std::string_view text) noexcept;

/// Per-line drift constants and the limit matrix q consumed by the
/// classification and weak-limit theorems. Vectors are either empty (not
/// known) or sized |S|.
struct DriftParams {
  std::vector<double> d;
  std::vector<double> c;
  std::vector<double> s2;
  ModulationMatrix limit_q;
  DriftMode mode = DriftMode::Lamperti;
  /// The sharper rate assumptions on q_x and the moments are asserted.
  bool sharp = false;

  bool has_constant() const noexcept { return !d.empty(); }
  bool has_lamperti() const noexcept { return !c.empty() && !s2.empty(); }
  void validate(std::size_t lines) const;
};

/// Abstract transition kernel. Implementations are immutable and row
/// evaluation is pure, so a model may be shared across threads.
class Model {
 public:
  virtual ~Model() = default;

  const LineSet& lines() const noexcept { return lines_; }
  const std::optional<DriftParams>& declared_params() const noexcept {
    return declared_;
  }
  virtual std::string_view kind() const noexcept = 0;
  virtual TransitionRow row(Height x, std::size_t line) const = 0;

 protected:
  Model(LineSet lines, std::optional<DriftParams> declared);

 private:
  LineSet lines_;
  std::optional<DriftParams> declared_;
};

using ModelPtr = std::shared_ptr<const Model>;

struct ModulatedQueueOptions {
  /// Permit |c_i| >= 1/2. Rows where c_i/x >= 1/2 use c_i/x = 1/4 and are
  /// flagged as clamped.
  bool allow_large_drift = false;
  bool sharp = true;
  std::size_t reference_line = 0;
};

/// Birth-death queue with arrival/service state changes a, b and service
/// perturbations c_i. Labels default to "0", "1", ...
ModelPtr modulated_queue_model(const ModulationMatrix& a, const ModulationMatrix& b,
                               std::vector<double> c,
                               const ModulatedQueueOptions& options = {},
                               std::vector<std::string> labels = {});

/// Additive correction to q_x(i,i) for the correlated walk; `sign` is +1 or -1.
using CorrelationCorrection = std::function<double(Height x, int sign)>;

/// Correlated walk on Z+ x {+1, -1}. Line 0 is "+1" (the reference line),
/// line 1 is "-1".
ModelPtr correlated_walk_model(double c, CorrelationCorrection correction = {},
                               bool sharp = true);

struct Increment {
  Height z = 0;
  std::size_t to_line = 0;
  double probability = 0.0;

  bool operator==(const Increment&) const = default;
};

using RowTable = std::map<State, TransitionRow>;

/// Kernel p(x,i,y,j) = r(y-x,i,j) for x >= x0, explicit rows below x0.
ModelPtr homogeneous_strip_model(LineSet lines,
                                 std::vector<std::vector<Increment>> increments,
                                 Height x0, RowTable boundary, bool sharp = true);

/// Table lookup first, then the homogeneous tail.
ModelPtr tabular_model(RowTable rows, ModelPtr tail);

using RowFunction = std::function<TransitionRow(Height x, std::size_t line)>;

/// Kernel given by an arbitrary row function; rows are validated on use.
ModelPtr callback_model(LineSet lines, RowFunction rows,
                        std::optional<DriftParams> declared = std::nullopt,
                        std::string kind = "callback");

/// q_x(i,j) = sum_y p(x,i,y,j).
ModulationMatrix q_at(const Model& model, Height x);

/// First and second moments of the X displacement of one row.
struct RowMoments {
  double m1 = 0.0;
  double m2 = 0.0;
};
RowMoments row_moments(const Model& model, Height x, std::size_t line);

/// Sweep rows 0..x_max on every line and validate them.
void validate_rows(const Model& model, Height x_max);

}  // namespace halfstrip
