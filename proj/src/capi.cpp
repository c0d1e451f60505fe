#include "halfstrip/halfstrip.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "halfstrip/config.hpp"
#include "halfstrip/run.hpp"
#include "halfstrip/stationary.hpp"
#include "halfstrip/weaklimit.hpp"

struct hs_config {
  std::optional<halfstrip::RunConfig> config;
  std::vector<std::string> errors;
  std::string hash;
};

struct hs_report {
  halfstrip::RunOutcome outcome;
  std::string status;
};

namespace {

thread_local std::string g_last_error;

hs_status status_of(halfstrip::ErrorCode code) {
  using halfstrip::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return HS_INVALID_ARGUMENT;
    case ErrorCode::Parse: return HS_PARSE;
    case ErrorCode::Validation: return HS_VALIDATION;
    case ErrorCode::Io: return HS_IO;
    case ErrorCode::NonConvergent:
    case ErrorCode::NotIrreducible:
    case ErrorCode::SingularSystem:
    case ErrorCode::NoReturn:
    case ErrorCode::HypothesisFailed: return HS_NUMERIC;
  }
  return HS_INTERNAL;
}

template <class F>
hs_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return HS_OK;
  } catch (const halfstrip::Error& e) {
    g_last_error = std::string(halfstrip::to_string(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HS_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HS_INTERNAL;
  }
}

hs_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return HS_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hs_version(void) { return halfstrip::library_version().data(); }

const char* hs_status_name(hs_status status) {
  switch (status) {
    case HS_OK: return "ok";
    case HS_INVALID_ARGUMENT: return "invalid_argument";
    case HS_PARSE: return "parse";
    case HS_VALIDATION: return "validation";
    case HS_NUMERIC: return "numeric";
    case HS_IO: return "io";
    case HS_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hs_last_error(void) { return g_last_error.c_str(); }

hs_status hs_config_parse(const char* text, hs_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!text) return null_argument("text");
  auto* cfg = new (std::nothrow) hs_config;
  if (!cfg) return HS_INTERNAL;
  *out = cfg;
  g_last_error.clear();
  try {
    cfg->config = halfstrip::parse_config(text);
    cfg->hash = halfstrip::config_hash(*cfg->config);
    return HS_OK;
  } catch (const halfstrip::ConfigError& e) {
    cfg->errors = e.errors();
    g_last_error = e.what();
    return status_of(e.code());
  } catch (...) {
    return guarded([] { throw; });
  }
}

size_t hs_config_error_count(const hs_config* config) {
  return config ? config->errors.size() : 0;
}

const char* hs_config_error(const hs_config* config, size_t index) {
  if (!config || index >= config->errors.size()) return nullptr;
  return config->errors[index].c_str();
}

int hs_config_valid(const hs_config* config) { return config && config->config ? 1 : 0; }

uint64_t hs_config_seed(const hs_config* config) {
  return hs_config_valid(config) ? config->config->seed : 0;
}

const char* hs_config_hash(const hs_config* config) {
  return hs_config_valid(config) ? config->hash.c_str() : nullptr;
}

hs_status hs_config_render(const hs_config* config, char** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!hs_config_valid(config)) return null_argument("config");
  return guarded([&] {
    *out = duplicate(halfstrip::render_config(*config->config));
    if (!*out) throw std::bad_alloc();
  });
}

void hs_config_free(hs_config* config) { delete config; }

void hs_string_free(char* text) { std::free(text); }

hs_status hs_run(const hs_config* config, unsigned jobs, const char* out_dir, int write_files,
                 hs_report** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!hs_config_valid(config)) return null_argument("config");
  return guarded([&] {
    halfstrip::RunConfig cfg = *config->config;
    if (out_dir) cfg.output_path = out_dir;
    halfstrip::RunOptions options;
    options.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
    options.write_files = write_files != 0;
    auto report = std::make_unique<hs_report>();
    report->outcome = halfstrip::run(cfg, options);
    report->status = std::string(halfstrip::to_string(report->outcome.status));
    *out = report.release();
  });
}

int hs_report_exit_code(const hs_report* report) { return report ? report->outcome.exit_code : 1; }

const char* hs_report_status(const hs_report* report) {
  return report ? report->status.c_str() : nullptr;
}

const char* hs_report_json(const hs_report* report) {
  return report ? report->outcome.report_json.c_str() : nullptr;
}

const char* hs_report_rendered(const hs_report* report) {
  return report ? report->outcome.rendered.c_str() : nullptr;
}

size_t hs_report_table_count(const hs_report* report) {
  return report ? report->outcome.tables.size() : 0;
}

const char* hs_report_table_name(const hs_report* report, size_t index) {
  if (!report || index >= report->outcome.tables.size()) return nullptr;
  return report->outcome.tables[index].first.c_str();
}

const char* hs_report_table(const hs_report* report, size_t index) {
  if (!report || index >= report->outcome.tables.size()) return nullptr;
  return report->outcome.tables[index].second.c_str();
}

size_t hs_report_file_count(const hs_report* report) {
  return report ? report->outcome.files_written.size() : 0;
}

const char* hs_report_file(const hs_report* report, size_t index) {
  if (!report || index >= report->outcome.files_written.size()) return nullptr;
  return report->outcome.files_written[index].c_str();
}

void hs_report_free(hs_report* report) { delete report; }

hs_status hs_weak_limit_cdf(double alpha, double theta, double x, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = halfstrip::f_cdf({alpha, theta}, x); });
}

hs_status hs_weak_limit_quantile(double alpha, double theta, double p, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = halfstrip::f_quantile({alpha, theta}, p); });
}

hs_status hs_stationary(const double* matrix, size_t n, double* pi_out) {
  if (!matrix) return null_argument("matrix");
  if (!pi_out) return null_argument("pi_out");
  return guarded([&] {
    if (n == 0) halfstrip::fail(halfstrip::ErrorCode::InvalidArgument, "matrix size must be >= 1");
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) rows[i][j] = matrix[i * n + j];
    const auto q = halfstrip::ModulationMatrix::from_rows(rows);
    q.validate_stochastic("matrix", halfstrip::kRowTolerance);
    const auto pi = halfstrip::stationary_distribution(q);
    for (size_t i = 0; i < n; ++i) pi_out[i] = pi[i];
  });
}

}  // extern "C"
