#ifndef HALFSTRIP_H
#define HALFSTRIP_H

/* C interface to the halfstrip library. Handles are opaque; every call that
 * can fail returns an hs_status and records a message retrievable with
 * hs_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HS_API __declspec(dllexport)
#else
#define HS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
  HS_OK = 0,
  HS_INVALID_ARGUMENT = 1,
  HS_PARSE = 2,
  HS_VALIDATION = 3,
  HS_NUMERIC = 4,
  HS_IO = 5,
  HS_INTERNAL = 6
} hs_status;

typedef struct hs_config hs_config;
typedef struct hs_report hs_report;

HS_API const char* hs_version(void);
HS_API const char* hs_status_name(hs_status status);

/* Message for the last failed call on this thread; empty after success. */
HS_API const char* hs_last_error(void);

/* Parse a JSON run configuration. On HS_PARSE or HS_VALIDATION *out is still
 * allocated when possible so the individual errors can be listed; callers free
 * it regardless of status. */
HS_API hs_status hs_config_parse(const char* text, hs_config** out);
HS_API size_t hs_config_error_count(const hs_config* config);
HS_API const char* hs_config_error(const hs_config* config, size_t index);
HS_API int hs_config_valid(const hs_config* config);
HS_API uint64_t hs_config_seed(const hs_config* config);
HS_API const char* hs_config_hash(const hs_config* config);
/* Canonical rendering. The string is owned by the caller: hs_string_free. */
HS_API hs_status hs_config_render(const hs_config* config, char** out);
HS_API void hs_config_free(hs_config* config);
HS_API void hs_string_free(char* text);

/* Run the configured command. jobs = 0 selects one worker per core.
 * out_dir overrides the configured output path when non-null; write_files = 0
 * keeps everything in memory. */
HS_API hs_status hs_run(const hs_config* config, unsigned jobs, const char* out_dir,
                        int write_files, hs_report** out);
/* 0 ok, 2 inconclusive or hypothesis not met. */
HS_API int hs_report_exit_code(const hs_report* report);
HS_API const char* hs_report_status(const hs_report* report);
HS_API const char* hs_report_json(const hs_report* report);
HS_API const char* hs_report_rendered(const hs_report* report);
HS_API size_t hs_report_table_count(const hs_report* report);
HS_API const char* hs_report_table_name(const hs_report* report, size_t index);
HS_API const char* hs_report_table(const hs_report* report, size_t index);
HS_API size_t hs_report_file_count(const hs_report* report);
HS_API const char* hs_report_file(const hs_report* report, size_t index);
HS_API void hs_report_free(hs_report* report);

/* Limit law F(x) = P(alpha, x^2 / theta). */
HS_API hs_status hs_weak_limit_cdf(double alpha, double theta, double x, double* out);
HS_API hs_status hs_weak_limit_quantile(double alpha, double theta, double p, double* out);

/* Stationary distribution of a row-major n x n stochastic matrix. */
HS_API hs_status hs_stationary(const double* matrix, size_t n, double* pi_out);

#ifdef __cplusplus
}
#endif

#endif
