#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stl/config.hpp"

namespace stl {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::vector<std::string> lines;  // human-readable measurements
    Json metrics = Json::object();
    double seconds = 0.0;
};

struct VerifyOptions {
    unsigned long long seed = 20240607;
    // replaces the stored S field of the criterion-1 set (corruption drill)
    std::optional<std::string> field_file;
    std::function<void(const std::string&)> log;
};

// "all", "hj", "equivalence", "ldp", "entropy", "bridge"; Config error otherwise
std::vector<int> suite_criteria(const std::string& suite);
const char* criterion_name(int id);

CriterionResult run_criterion(int id, const VerifyOptions& opt = {});
std::vector<CriterionResult> run_suite(const std::string& suite, const VerifyOptions& opt = {});

Json to_json(const CriterionResult& r);

}  // namespace stl
