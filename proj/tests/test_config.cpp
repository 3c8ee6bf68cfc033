#include "doctest.h"

#include <cmath>

#include "stl/config.hpp"

using namespace stl;

namespace {

ErrorKind kind_of(const std::string& text) {
    try {
        parse_config(text, "t.toml");
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Oracle;  // sentinel: no error
}

}  // namespace

TEST_CASE("parser subset") {
    Config c = parse_config(R"(
# comment
title = 'lab'
[cost]
epsilon = 0.5          # trailing comment
horizon = 1_000
preset = "stationary"
running = { kind = "quadratic", lambda = [[1.0, 0.0], [0.0, 2.0]], center = [0, 0] }
[grid.extra]
flag = true
values = [
  1.5,
  -2e-1,
]
)");
    CHECK(c.root["title"] == "lab");
    const Json& cost = c.section("cost");
    CHECK(cost["epsilon"].get<double>() == 0.5);
    CHECK(cost["horizon"].is_number_integer());
    CHECK(cost["horizon"].get<int>() == 1000);
    CHECK(cost["running"]["lambda"][1][1].get<double>() == 2.0);
    CHECK(c.root["grid"]["extra"]["flag"] == true);
    CHECK(c.root["grid"]["extra"]["values"][1].get<double>() == doctest::Approx(-0.2));
}

TEST_CASE("duplicates and malformed input are config errors") {
    CHECK(kind_of("[cost]\nepsilon = 1\nepsilon = 2\n") == ErrorKind::Config);
    CHECK(kind_of("[cost]\na = 1\n[cost]\nb = 2\n") == ErrorKind::Config);
    CHECK(kind_of("[[runs]]\n") == ErrorKind::Config);
    CHECK(kind_of("x = \n") == ErrorKind::Config);
    CHECK(kind_of("x = \"open\n") == ErrorKind::Config);
    try {
        parse_config("a = 1\na = 2\n", "dup.toml");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("dup.toml:2") != std::string::npos);
    }
}

TEST_CASE("digest is invariant under key reordering") {
    Config a = parse_config("[cost]\nepsilon = 1.0\nhorizon = 2.0\n[grid]\nx_min = -4\nx_max = 4\n");
    Config b = parse_config("[grid]\nx_max = 4\nx_min = -4\n[cost]\nhorizon = 2.0\nepsilon = 1.0\n");
    Config c = parse_config("[cost]\nepsilon = 1.5\nhorizon = 2.0\n[grid]\nx_min = -4\nx_max = 4\n");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != c.digest());
    CHECK(a.digest().size() == 16);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("missing section is named") {
    Config c = parse_config("[cost]\nepsilon = 1\n");
    try {
        grid_from_config(c, cost_from_config(c));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(std::string(e.what()).find("[grid]") != std::string::npos);
    }
}

TEST_CASE("cost presets") {
    Config c = parse_config("[cost]\nepsilon = 0.5\npreset = \"relaxing\"\nlambda = 2\nkappa = 0.5\n");
    CostSpec s = cost_from_config(c);
    CHECK(s.g(1.0) == doctest::Approx(1.0));
    CHECK(s.V(0.0, 1.0) == doctest::Approx(0.5 * 4 - 0.5));
    REQUIRE(s.initial);
    CHECK(s.f(2.0) == doctest::Approx(1.0));

    Config h = parse_config("[cost]\nepsilon = 1\npreset = \"harmonic\"\n");
    CostSpec hs = cost_from_config(h);
    CHECK(hs.V(0.0, 2.0) == doctest::Approx(2.0));
    CHECK(hs.g(3.0) == 0.0);

    Config o = parse_config(
        "[cost]\nepsilon = 1\npreset = \"zero\"\nterminal = { kind = \"linear\", a = [3] }\n"
        "running = { kind = \"double_well\", a = 1, b = 2 }\n");
    CostSpec os = cost_from_config(o);
    CHECK(os.g(0.5) == doctest::Approx(1.5));
    CHECK(os.V(0.0, 0.0) == doctest::Approx(16.0));

    CHECK_THROWS_AS(cost_from_config(parse_config("[cost]\nhorizon = 1\n")), Error);
    CHECK_THROWS_AS(cost_from_config(parse_config("[cost]\nepsilon = 1\npreset = \"nope\"\n")), Error);
}

TEST_CASE("grid section") {
    Config c = parse_config("[cost]\nepsilon = 1\nhorizon = 2\n[grid]\nx_min = -3\nx_max = 3\nn_x = 65\nn_t = 11\n");
    SpaceTimeGrid g = grid_from_config(c, cost_from_config(c));
    CHECK(g.x().n == 65);
    CHECK(g.n_t == 11);
    CHECK(g.T == 2.0);
    Config bad = parse_config("[cost]\nepsilon = 1\n[grid]\nx_min = -3\nx_max = 3\nn_x = 4\n");
    CHECK_THROWS_AS(grid_from_config(bad, cost_from_config(bad)), Error);
}
