#include "stl/stl.h"

#include <cstring>
#include <mutex>
#include <string>

#include "stl/commands.hpp"
#include "stl/hjheat.hpp"
#include "stl/parallel.hpp"

struct stl_config {
    stl::Config cfg;
};

struct stl_result {
    stl::CommandResult res;
    std::string json;
};

struct stl_field {
    stl::ScalarField f;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
stl_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

stl_status set_error(stl_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

stl_status from_exit(int code) {
    switch (code) {
    case 0: return STL_OK;
    case 2: return STL_ERR_CONFIG;
    case 3: return STL_ERR_SOLVER;
    case 4: return STL_ERR_VERIFY;
    default: return STL_ERR_INTERNAL;
    }
}

stl_status from_error(const stl::Error& e) {
    if (e.kind() == stl::ErrorKind::Io) return STL_ERR_IO;
    return from_exit(stl::exit_code_for(e.kind()));
}

// Wraps a body so no exception crosses the C boundary.
template <class F>
stl_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const stl::Error& e) {
        return set_error(from_error(e), std::string(stl::to_string(e.kind())) + " error: " + e.what());
    } catch (const std::bad_alloc&) {
        return set_error(STL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(STL_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(STL_ERR_INTERNAL, "unknown exception");
    }
}

void forward_log(stl::LogLevel l, const std::string& m) {
    std::lock_guard<std::mutex> lk(g_log_mutex);
    if (g_log_fn) g_log_fn(static_cast<stl_log_level>(l), m.c_str(), g_log_user);
}

}  // namespace

extern "C" {

const char* stl_version(void) { return stl::kVersion; }

const char* stl_last_error(void) { return g_last_error.c_str(); }

const char* stl_status_string(stl_status s) {
    switch (s) {
    case STL_OK: return "ok";
    case STL_ERR_CONFIG: return "config error";
    case STL_ERR_SOLVER: return "solver error";
    case STL_ERR_VERIFY: return "verification failure";
    case STL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case STL_ERR_IO: return "io error";
    case STL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void stl_set_threads(int n) { stl::set_threads(n < 0 ? 0 : n); }

void stl_set_log_callback(stl_log_fn fn, void* user) {
    std::lock_guard<std::mutex> lk(g_log_mutex);
    g_log_fn = fn;
    g_log_user = user;
}

stl_status stl_config_load(const char* path, stl_config** out) {
    if (!path || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new stl_config{stl::load_config(path)};
        return STL_OK;
    });
}

stl_status stl_config_parse(const char* text, stl_config** out) {
    if (!text || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new stl_config{stl::parse_config(text)};
        return STL_OK;
    });
}

void stl_config_free(stl_config* cfg) { delete cfg; }

stl_status stl_config_digest(const stl_config* cfg, char* buf, size_t len) {
    if (!cfg || !buf) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    std::string d = cfg->cfg.digest();
    if (len < d.size() + 1) return set_error(STL_ERR_INVALID_ARGUMENT, "digest buffer needs 17 bytes");
    std::memcpy(buf, d.c_str(), d.size() + 1);
    return STL_OK;
}

stl_status stl_run(const stl_config* cfg, const stl_run_options* opt, stl_result** out) {
    if (!opt || !opt->command || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        stl::CommandOptions co;
        co.command = opt->command;
        if (cfg) co.config = cfg->cfg;
        if (opt->has_seed) co.seed = opt->seed;
        co.threads = opt->threads;
        if (opt->out_dir) co.out_dir = opt->out_dir;
        if (opt->suite) co.suite = opt->suite;
        co.log = forward_log;
        auto* r = new stl_result{stl::run_command(co), {}};
        r->json = stl::Json{{"command", co.command},
                       {"exit_code", r->res.exit_code},
                       {"error", r->res.error},
                       {"summary", r->res.summary},
                       {"outputs", r->res.outputs}}
                      .dump();
        *out = r;
        stl_status s = from_exit(r->res.exit_code);
        if (s != STL_OK) g_last_error = r->res.error;
        return s;
    });
}

int stl_result_exit_code(const stl_result* r) { return r ? r->res.exit_code : -1; }
const char* stl_result_json(const stl_result* r) { return r ? r->json.c_str() : ""; }
const char* stl_result_error(const stl_result* r) { return r ? r->res.error.c_str() : ""; }
void stl_result_free(stl_result* r) { delete r; }

stl_status stl_solve_hj(const stl_config* cfg, stl_field** out) {
    if (!cfg || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        stl::CostSpec spec = stl::cost_from_config(cfg->cfg);
        stl::SpaceTimeGrid grid = stl::grid_from_config(cfg->cfg, spec);
        stl::ValidationReport v = stl::validate_spec(spec, grid);
        if (!v.ok()) stl::fail(stl::ErrorKind::Config, "invalid problem specification: " + v.violations.front());
        *out = new stl_field{stl::solve_hj(spec, grid)};
        return STL_OK;
    });
}

int stl_field_nx(const stl_field* f) { return f ? f->f.nx() : 0; }
int stl_field_nt(const stl_field* f) { return f ? f->f.n_t : 0; }
double stl_field_x_min(const stl_field* f) { return f ? f->f.axes[0].min : 0.0; }
double stl_field_x_max(const stl_field* f) { return f ? f->f.axes[0].max : 0.0; }
double stl_field_horizon(const stl_field* f) { return f ? f->f.T : 0.0; }
const double* stl_field_values(const stl_field* f) { return f ? f->f.values.data() : nullptr; }

stl_status stl_field_at(const stl_field* f, int k, int i, double* out) {
    if (!f || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    if (k < 0 || k >= f->f.n_t || i < 0 || i >= f->f.nx())
        return set_error(STL_ERR_INVALID_ARGUMENT, "field index out of range");
    *out = f->f.at(k, i);
    return STL_OK;
}

stl_status stl_field_interp(const stl_field* f, double t, double x, double* out) {
    if (!f || !out) return set_error(STL_ERR_INVALID_ARGUMENT, "null argument");
    if (!f->f.covers(x) || t < 0.0 || t > f->f.T) return set_error(STL_ERR_INVALID_ARGUMENT, "point outside the field");
    return guarded([&] {
        *out = f->f.interp(t, x);
        return STL_OK;
    });
}

void stl_field_free(stl_field* f) { delete f; }

}  // extern "C"
