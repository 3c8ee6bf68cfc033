#ifndef STL_STL_H
#define STL_STL_H

/* C interface to the solver library. All handles are opaque; every call that
 * can fail returns an stl_status and leaves a thread-local message readable
 * through stl_last_error(). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(STL_BUILDING_LIBRARY)
#    define STL_API __declspec(dllexport)
#  else
#    define STL_API __declspec(dllimport)
#  endif
#else
#  define STL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stl_status {
    STL_OK = 0,
    STL_ERR_CONFIG = 2,            /* malformed config or inconsistent problem data */
    STL_ERR_SOLVER = 3,            /* numerical failure, IO failure while solving */
    STL_ERR_VERIFY = 4,            /* a verification check did not pass */
    STL_ERR_INVALID_ARGUMENT = 5,  /* null handle, bad index */
    STL_ERR_IO = 6,
    STL_ERR_INTERNAL = 7
} stl_status;

typedef struct stl_config stl_config;
typedef struct stl_result stl_result;
typedef struct stl_field stl_field;

typedef enum stl_log_level { STL_LOG_DEBUG = 0, STL_LOG_INFO = 1, STL_LOG_WARN = 2, STL_LOG_ERROR = 3 } stl_log_level;
typedef void (*stl_log_fn)(stl_log_level level, const char* message, void* user);

STL_API const char* stl_version(void);
STL_API const char* stl_last_error(void);
STL_API const char* stl_status_string(stl_status s);

/* worker cap for internal loops; 0 = hardware concurrency. Results do not depend on it. */
STL_API void stl_set_threads(int n);
/* process-wide log sink; pass NULL to silence */
STL_API void stl_set_log_callback(stl_log_fn fn, void* user);

STL_API stl_status stl_config_load(const char* path, stl_config** out);
STL_API stl_status stl_config_parse(const char* text, stl_config** out);
STL_API void stl_config_free(stl_config* cfg);
/* 16 hex digits plus terminator; stable under key reordering */
STL_API stl_status stl_config_digest(const stl_config* cfg, char* buf, size_t len);

typedef struct stl_run_options {
    const char* command;  /* hj, simulate, entropy, bridge, mpp, verify */
    const char* out_dir;  /* NULL means "out" */
    const char* suite;    /* verify only; NULL means config or "all" */
    unsigned long long seed;
    int has_seed;         /* nonzero: seed overrides [run] seed */
    int threads;          /* 0 leaves the current cap */
} stl_run_options;

/* Runs a command. *out receives a result handle even when the command fails,
 * so the JSON summary and exit code can be inspected; the return value equals
 * the command's exit code. cfg may be NULL for verify. */
STL_API stl_status stl_run(const stl_config* cfg, const stl_run_options* opt, stl_result** out);
STL_API int stl_result_exit_code(const stl_result* r);
STL_API const char* stl_result_json(const stl_result* r);
STL_API const char* stl_result_error(const stl_result* r);
STL_API void stl_result_free(stl_result* r);

/* S = eps log phi on the config's [cost] and [grid]. */
STL_API stl_status stl_solve_hj(const stl_config* cfg, stl_field** out);
STL_API int stl_field_nx(const stl_field* f);
STL_API int stl_field_nt(const stl_field* f);
STL_API double stl_field_x_min(const stl_field* f);
STL_API double stl_field_x_max(const stl_field* f);
STL_API double stl_field_horizon(const stl_field* f);
/* row-major (time slowest), nx * nt values; valid until stl_field_free */
STL_API const double* stl_field_values(const stl_field* f);
STL_API stl_status stl_field_at(const stl_field* f, int k, int i, double* out);
STL_API stl_status stl_field_interp(const stl_field* f, double t, double x, double* out);
STL_API void stl_field_free(stl_field* f);

#ifdef __cplusplus
}
#endif

#endif
