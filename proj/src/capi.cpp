#include "qnetsim.h"

#include <new>
#include <string>
#include <vector>

#include "qnet/errors.hpp"
#include "qnet/runner.hpp"

struct qnet_result {
    qnet::CommandResult impl;
};

namespace {

thread_local std::string g_last_error;

qnet::RunOptions convert(const qnet_run_options* opts) {
    qnet::RunOptions out;
    if (!opts) return out;
    if (opts->has_seed) out.seed = opts->seed;
    if (opts->trials > 0) out.trials = opts->trials;
    if (opts->has_epsilon) out.epsilon = opts->epsilon;
    if (opts->out_dir) out.out_dir = opts->out_dir;
    if (opts->jobs > 0) out.jobs = opts->jobs;
    return out;
}

template <typename Fn>
int wrap(Fn&& fn, qnet_result** out) {
    if (!out) {
        g_last_error = "null result pointer";
        return QNET_ERR_PARSE;
    }
    *out = nullptr;
    try {
        auto* r = new qnet_result{fn()};
        g_last_error.clear();
        *out = r;
        return QNET_OK;
    } catch (const qnet::Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return QNET_ERR_ENGINE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QNET_ERR_ENGINE;
    }
}

}  // namespace

extern "C" {

int qnet_validate(const char* path, qnet_result** out) {
    if (!path) {
        g_last_error = "null scenario path";
        if (out) *out = nullptr;
        return QNET_ERR_PARSE;
    }
    return wrap([&] { return qnet::cmd_validate(path); }, out);
}

int qnet_run(const char* path, const qnet_run_options* opts, qnet_result** out) {
    if (!path) {
        g_last_error = "null scenario path";
        if (out) *out = nullptr;
        return QNET_ERR_PARSE;
    }
    return wrap([&] { return qnet::cmd_run(path, convert(opts)); }, out);
}

int qnet_sweep(const char* path, const int* sizes, int n_sizes, const qnet_run_options* opts,
               qnet_result** out) {
    if (!path || (n_sizes > 0 && !sizes)) {
        g_last_error = !path ? "null scenario path" : "null sizes with nonzero count";
        if (out) *out = nullptr;
        return QNET_ERR_PARSE;
    }
    std::vector<int> size_list(sizes, sizes + (n_sizes > 0 ? n_sizes : 0));
    return wrap([&] { return qnet::cmd_sweep(path, size_list, convert(opts)); }, out);
}

int qnet_result_exit_code(const qnet_result* r) { return r ? r->impl.exit_code : QNET_ERR_PARSE; }

const char* qnet_result_report(const qnet_result* r) {
    return r ? r->impl.report_json.c_str() : "";
}

int qnet_result_line_count(const qnet_result* r) {
    return r ? static_cast<int>(r->impl.lines.size()) : 0;
}

const char* qnet_result_line(const qnet_result* r, int i) {
    if (!r || i < 0 || i >= static_cast<int>(r->impl.lines.size())) return "";
    return r->impl.lines[static_cast<std::size_t>(i)].c_str();
}

int qnet_result_artifact_count(const qnet_result* r) {
    return r ? static_cast<int>(r->impl.artifacts.size()) : 0;
}

const char* qnet_result_artifact(const qnet_result* r, int i) {
    if (!r || i < 0 || i >= static_cast<int>(r->impl.artifacts.size())) return "";
    return r->impl.artifacts[static_cast<std::size_t>(i)].c_str();
}

void qnet_result_free(qnet_result* r) { delete r; }

const char* qnet_last_error(void) { return g_last_error.c_str(); }

const char* qnet_version(void) { return "1.0.0"; }

}  // extern "C"
