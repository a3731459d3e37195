#ifndef QNETSIM_H
#define QNETSIM_H

#include <stdint.h>

#if defined(_WIN32)
#define QNETSIM_API __declspec(dllexport)
#else
#define QNETSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes shared by every entry point and by the CLI exit codes. */
enum {
    QNET_OK = 0,
    QNET_ERR_PARSE = 1,  /* unreadable/malformed input, bad usage */
    QNET_ERR_CHECKS = 2, /* semantic validation or configured checks failed */
    QNET_ERR_ENGINE = 3, /* simulation/runtime failure */
};

/* Opaque command outcome. Owned by the caller; free with qnet_result_free. */
typedef struct qnet_result qnet_result;

typedef struct qnet_run_options {
    uint64_t seed;
    int has_seed;
    int trials; /* <= 0: scenario value */
    double epsilon;
    int has_epsilon;
    const char* out_dir; /* NULL: scenario / QNET_OUT_DIR / cwd */
    int jobs;            /* <= 0: 1 */
} qnet_run_options;

/* Each command returns QNET_OK and fills *out on a completed run (which may
 * still carry exit code QNET_ERR_CHECKS when configured checks failed), or a
 * nonzero code with *out = NULL; qnet_last_error() then describes the
 * failure. */
QNETSIM_API int qnet_validate(const char* path, qnet_result** out);
QNETSIM_API int qnet_run(const char* path, const qnet_run_options* opts, qnet_result** out);
QNETSIM_API int qnet_sweep(const char* path, const int* sizes, int n_sizes,
                           const qnet_run_options* opts, qnet_result** out);

QNETSIM_API int qnet_result_exit_code(const qnet_result* r);
QNETSIM_API const char* qnet_result_report(const qnet_result* r); /* "" when absent */
QNETSIM_API int qnet_result_line_count(const qnet_result* r);
QNETSIM_API const char* qnet_result_line(const qnet_result* r, int i);
QNETSIM_API int qnet_result_artifact_count(const qnet_result* r);
QNETSIM_API const char* qnet_result_artifact(const qnet_result* r, int i);
QNETSIM_API void qnet_result_free(qnet_result* r);

/* Message of the calling thread's most recent failure ("" when none). */
QNETSIM_API const char* qnet_last_error(void);

QNETSIM_API const char* qnet_version(void);

#ifdef __cplusplus
}
#endif

#endif /* QNETSIM_H */
