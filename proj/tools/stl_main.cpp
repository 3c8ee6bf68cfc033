#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stl/stl.h"

#ifdef STL_HAVE_SPDLOG
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#endif

namespace {

int g_min_level = STL_LOG_INFO;

// STL_LOG=debug|info|warn|error|off
void configure_level() {
    const char* env = std::getenv("STL_LOG");
    if (!env) return;
    std::string v = env;
    if (v == "debug" || v == "trace") g_min_level = STL_LOG_DEBUG;
    else if (v == "info") g_min_level = STL_LOG_INFO;
    else if (v == "warn" || v == "warning") g_min_level = STL_LOG_WARN;
    else if (v == "error") g_min_level = STL_LOG_ERROR;
    else if (v == "off") g_min_level = STL_LOG_ERROR + 1;
}

void sink(stl_log_level level, const char* msg, void*) {
    if (level < g_min_level) return;
#ifdef STL_HAVE_SPDLOG
    static auto logger = spdlog::stderr_color_mt("stl");
    switch (level) {
    case STL_LOG_DEBUG: logger->debug(msg); break;
    case STL_LOG_INFO: logger->info(msg); break;
    case STL_LOG_WARN: logger->warn(msg); break;
    default: logger->error(msg); break;
    }
#else
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << names[level] << "] " << msg << '\n';
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gibbs path measures, HJ equations, entropy production and Schrodinger bridges"};
    app.set_version_flag("--version", std::string(stl_version()));
    std::string command, config, out = "out", suite;
    unsigned long long seed = 0;
    int threads = 0;
    app.add_option("command", command, "hj | simulate | entropy | bridge | mpp | verify")
        ->required()
        ->check(CLI::IsMember({"hj", "simulate", "entropy", "bridge", "mpp", "verify"}));
    app.add_option("--config,-c", config, "TOML config file");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides [run] seed)");
    app.add_option("--threads", threads, "worker cap; results do not depend on it")->check(CLI::NonNegativeNumber);
    app.add_option("--out,-o", out, "output directory");
    app.add_option("--suite", suite, "verify suite: all, hj, equivalence, ldp, entropy, bridge");
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    configure_level();
    stl_set_log_callback(sink, nullptr);

    stl_config* cfg = nullptr;
    if (!config.empty()) {
        if (stl_config_load(config.c_str(), &cfg) != STL_OK) {
            sink(STL_LOG_ERROR, stl_last_error(), nullptr);
            return 2;
        }
    } else if (command != "verify") {
        sink(STL_LOG_ERROR, ("command '" + command + "' needs --config").c_str(), nullptr);
        return 2;
    }

    stl_run_options ro{};
    ro.command = command.c_str();
    ro.out_dir = out.c_str();
    ro.suite = suite.empty() ? nullptr : suite.c_str();
    ro.seed = seed;
    ro.has_seed = seed_opt->count() > 0;
    ro.threads = threads;
    stl_result* res = nullptr;
    stl_status st = stl_run(cfg, &ro, &res);
    int code = res ? stl_result_exit_code(res) : (st == STL_ERR_CONFIG ? 2 : 3);
    if (res) std::cout << stl_result_json(res) << '\n';
    else sink(STL_LOG_ERROR, stl_last_error(), nullptr);
    stl_result_free(res);
    stl_config_free(cfg);
    return code;
}
