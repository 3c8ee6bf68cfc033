#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stl/config.hpp"

namespace stl {

inline constexpr const char* kVersion = "0.1.0";

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };
using LogSink = std::function<void(LogLevel, const std::string&)>;

struct CommandOptions {
    std::string command;                 // hj, simulate, entropy, bridge, mpp, verify
    std::optional<Config> config;        // optional only for verify
    std::optional<unsigned long long> seed;  // overrides [run] seed
    int threads = 0;
    std::string out_dir = "out";
    std::string suite;                   // verify; falls back to [verify] suite, then "all"
    LogSink log;
};

// Exit codes: 0 success, 2 config/specification error, 3 solver error, 4 verification failure.
struct CommandResult {
    int exit_code = 0;
    std::string error;
    Json summary = Json::object();
    std::vector<std::string> outputs;  // paths relative to out_dir
};

CommandResult run_command(const CommandOptions& opt);

int exit_code_for(ErrorKind k);

}  // namespace stl
