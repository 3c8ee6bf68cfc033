// Runs the ten acceptance criteria; one verdict line each. -v adds the measurements.
#include <cstdio>
#include <cstring>
#include <exception>

#include "stl/verify.hpp"

int main(int argc, char** argv) {
    bool verbose = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "-v") == 0) verbose = true;
    stl::VerifyOptions opt;
    int failed = 0;
    for (int id : stl::suite_criteria("all")) {
        try {
            stl::CriterionResult r = stl::run_criterion(id, opt);
            std::printf("criterion %2d  %-30s %s  (%.1f s)\n", id, r.name.c_str(), r.pass ? "PASS" : "FAIL", r.seconds);
            if (verbose || !r.pass)
                for (const auto& l : r.lines) std::printf("      %s\n", l.c_str());
            if (!r.pass) ++failed;
        } catch (const std::exception& e) {
            std::printf("criterion %2d  %-30s FAIL  (error: %s)\n", id, stl::criterion_name(id), e.what());
            ++failed;
        }
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
