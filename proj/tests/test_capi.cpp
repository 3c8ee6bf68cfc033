#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "stl/stl.h"

namespace {

const char* kZero = "[cost]\nepsilon = 1.0\n[grid]\nx_min = -6\nx_max = 6\nn_x = 65\nn_t = 51\n";
const char* kLinear =
    "[cost]\nepsilon = 1.0\npreset = \"linear\"\n[grid]\nx_min = -12\nx_max = 12\nn_x = 385\nn_t = 1001\n";

void count_logs(stl_log_level, const char*, void* user) { ++*static_cast<int*>(user); }

}  // namespace

TEST_CASE("version and status strings") {
    CHECK(std::strlen(stl_version()) > 0);
    CHECK(std::string(stl_status_string(STL_ERR_CONFIG)) == "config error");
}

TEST_CASE("config parse and digest") {
    stl_config* a = nullptr;
    stl_config* b = nullptr;
    REQUIRE(stl_config_parse("[cost]\nepsilon = 1\nhorizon = 2\n", &a) == STL_OK);
    REQUIRE(stl_config_parse("[cost]\nhorizon = 2\nepsilon = 1\n", &b) == STL_OK);
    char da[17], db[17], small[4];
    CHECK(stl_config_digest(a, da, sizeof da) == STL_OK);
    CHECK(stl_config_digest(b, db, sizeof db) == STL_OK);
    CHECK(std::string(da) == std::string(db));
    CHECK(stl_config_digest(a, small, sizeof small) == STL_ERR_INVALID_ARGUMENT);
    stl_config_free(a);
    stl_config_free(b);

    stl_config* bad = nullptr;
    CHECK(stl_config_parse("a = 1\na = 2\n", &bad) == STL_ERR_CONFIG);
    CHECK(bad == nullptr);
    CHECK(std::string(stl_last_error()).find("duplicate") != std::string::npos);
    CHECK(stl_config_load("/nonexistent/x.toml", &bad) == STL_ERR_CONFIG);
}

TEST_CASE("null handling") {
    CHECK(stl_config_parse(nullptr, nullptr) == STL_ERR_INVALID_ARGUMENT);
    CHECK(stl_solve_hj(nullptr, nullptr) == STL_ERR_INVALID_ARGUMENT);
    CHECK(stl_field_nx(nullptr) == 0);
    CHECK(stl_result_exit_code(nullptr) == -1);
    stl_config_free(nullptr);
    stl_field_free(nullptr);
    stl_result_free(nullptr);
}

TEST_CASE("solve_hj through the C API") {
    stl_config* cfg = nullptr;
    REQUIRE(stl_config_parse(kLinear, &cfg) == STL_OK);
    stl_field* f = nullptr;
    REQUIRE(stl_solve_hj(cfg, &f) == STL_OK);
    CHECK(stl_field_nx(f) == 385);
    CHECK(stl_field_nt(f) == 1001);
    CHECK(stl_field_x_min(f) == -12.0);
    CHECK(stl_field_horizon(f) == 1.0);
    double v = 0.0;
    REQUIRE(stl_field_interp(f, 0.0, 0.0, &v) == STL_OK);
    CHECK(v == doctest::Approx(0.5).epsilon(1e-5));
    REQUIRE(stl_field_at(f, 1000, 192, &v) == STL_OK);
    CHECK(std::abs(v) <= 1e-12);
    CHECK(stl_field_values(f)[1000 * 385 + 192] == v);
    CHECK(stl_field_at(f, 1001, 0, &v) == STL_ERR_INVALID_ARGUMENT);
    CHECK(stl_field_interp(f, 0.0, 20.0, &v) == STL_ERR_INVALID_ARGUMENT);
    stl_field_free(f);
    stl_config_free(cfg);

    stl_config* neg = nullptr;
    REQUIRE(stl_config_parse("[cost]\nepsilon = -1\n[grid]\nx_min = -1\nx_max = 1\n", &neg) == STL_OK);
    CHECK(stl_solve_hj(neg, &f) == STL_ERR_CONFIG);
    stl_config_free(neg);
}

TEST_CASE("run the hj command") {
    auto dir = std::filesystem::temp_directory_path() / "stl_capi_test";
    std::filesystem::remove_all(dir);
    stl_config* cfg = nullptr;
    REQUIRE(stl_config_parse(kZero, &cfg) == STL_OK);
    int logs = 0;
    stl_set_log_callback(count_logs, &logs);
    stl_run_options o{};
    o.command = "hj";
    std::string out = dir.string();
    o.out_dir = out.c_str();
    stl_result* r = nullptr;
    CHECK(stl_run(cfg, &o, &r) == STL_OK);
    REQUIRE(r != nullptr);
    CHECK(stl_result_exit_code(r) == 0);
    auto json = nlohmann::json::parse(stl_result_json(r));
    CHECK(json["summary"]["max_residual"].get<double>() <= 1e-10);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "S.csv"));
    stl_result_free(r);
    stl_set_log_callback(nullptr, nullptr);

    o.command = "bogus";
    CHECK(stl_run(cfg, &o, &r) == STL_ERR_CONFIG);
    CHECK(stl_result_exit_code(r) == 2);
    stl_result_free(r);
    stl_config_free(cfg);
    std::filesystem::remove_all(dir);
}
