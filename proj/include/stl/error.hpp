#pragma once

#include <stdexcept>
#include <string>

namespace stl {

enum class ErrorKind {
    Domain,         // argument outside the admissible set
    Specification,  // inconsistent problem data
    Stability,      // numerical scheme lost positivity / overflowed
    Convergence,    // iterative solver did not converge
    Config,         // malformed or incomplete configuration
    Io,             // file read/write failure
    Oracle,         // a closed-form verifier cannot produce a value
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Specification: return "specification";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Oracle: return "oracle";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace stl
