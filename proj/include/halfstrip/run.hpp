#pragma once

#include <string>
#include <vector>

#include "halfstrip/config.hpp"

namespace halfstrip {

std::string_view library_version() noexcept;

enum class RunStatus { Ok, Inconclusive, HypothesisFailed };

std::string_view to_string(RunStatus status) noexcept;

struct RunOptions {
  /// Worker threads for trial-parallel estimators. Results do not depend on it.
  unsigned jobs = 1;
  /// Write the report and CSV tables under config.output_path.
  bool write_files = true;
};

struct RunOutcome {
  RunStatus status = RunStatus::Ok;
  /// 0 success, 2 theorem hypothesis not met / inconclusive.
  int exit_code = 0;
  /// The JSON report (deterministic for a given config).
  std::string report_json;
  /// The report rendered in config.format.
  std::string rendered;
  /// name -> CSV content, in a fixed order.
  std::vector<std::pair<std::string, std::string>> tables;
  std::vector<std::string> files_written;
};

/// Dispatch the configured command. Library errors propagate as exceptions;
/// HypothesisFailed and Inconclusive are reported through the outcome.
RunOutcome run(const RunConfig& config, const RunOptions& options = {});

}  // namespace halfstrip
