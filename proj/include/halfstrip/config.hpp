#pragma once

// Run configuration: a JSON document with a model section, a command
// section, a seed and an output section.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "halfstrip/error.hpp"
#include "halfstrip/model.hpp"

namespace halfstrip {

enum class ModelKind { ModulatedQueue, CorrelatedWalk, HomogeneousStrip, Tabular };

struct ModelConfig {
  ModelKind kind = ModelKind::CorrelatedWalk;
  std::vector<std::string> lines;
  std::optional<std::string> reference_line;
  std::optional<bool> sharp;

  // correlated_walk: the scalar c. modulated_queue: per-line c_values.
  double c = 0.0;
  std::vector<double> c_values;
  std::vector<std::vector<double>> a, b;
  bool allow_large_drift = false;

  // homogeneous_strip / tabular tail
  Height x0 = 0;
  std::vector<std::vector<Increment>> increments;
  RowTable boundary;
  // tabular overrides
  RowTable rows;

  bool operator==(const ModelConfig&) const = default;
};

enum class OutputFormat { Json, Csv, Text };

struct CommandConfig {
  std::string name;  // classify | simulate | excursion-stats | coupling | weak-limit
  std::optional<DriftMode> mode;
  std::vector<Height> grid;
  std::optional<bool> estimate;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> trials;
  std::optional<Height> initial_x;
  std::optional<std::string> initial_line;
  std::optional<Height> x;
  std::optional<std::string> line;
  std::optional<std::size_t> r_max;
  std::vector<Height> d_grid;
  std::vector<Height> x_set;
  std::optional<std::size_t> horizon;
  std::optional<double> horizon_a;

  bool operator==(const CommandConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  CommandConfig command;
  std::uint64_t seed = 0;
  std::string output_path = ".";
  OutputFormat format = OutputFormat::Json;

  bool operator==(const RunConfig&) const = default;
};

/// All problems found while reading a config: the parse error (with line and
/// column) or every semantic error, each prefixed by its field path.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

inline const std::vector<std::string> kCommandNames = {"classify", "simulate", "excursion-stats",
                                                       "coupling", "weak-limit"};

RunConfig parse_config(const std::string& text);
std::string render_config(const RunConfig& config);

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(OutputFormat format) noexcept;
std::optional<OutputFormat> parse_output_format(std::string_view text) noexcept;

/// Build the kernel described by a validated model section.
ModelPtr build_model(const ModelConfig& config);

/// FNV-1a 64 of the canonical rendering, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace halfstrip
