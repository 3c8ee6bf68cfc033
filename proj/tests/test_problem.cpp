#include "doctest.h"

#include <cmath>
#include <memory>

#include "helpers.hpp"
#include "stl/problem.hpp"

using namespace stl;

TEST_CASE("validate_spec accepts a standard instance") {
    CostSpec s = testing::spec_with(1.0);
    auto r = validate_spec(s, SpaceTimeGrid::line(-8, 8, 257, 1001, 1.0));
    CHECK(r.ok());
}

TEST_CASE("validate_spec reports a negative epsilon") {
    CostSpec s = testing::spec_with(-1.0);
    auto r = validate_spec(s, SpaceTimeGrid::line(-8, 8, 257, 1001, 1.0));
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (auto& v : r.violations) found = found || v.find("epsilon must be positive") != std::string::npos;
    CHECK(found);
}

TEST_CASE("validate_spec warns about a narrow domain") {
    CostSpec s = testing::spec_with(1.0);
    auto r = validate_spec(s, SpaceTimeGrid::line(-0.5, 0.5, 65, 101, 1.0));
    bool found = false;
    for (auto& w : r.warnings) found = found || w.find("narrower") != std::string::npos;
    CHECK(found);
}

TEST_CASE("validate_spec rejects tiny grids and is pure") {
    CostSpec s = testing::spec_with(1.0);
    auto g = SpaceTimeGrid::line(-1, 1, 4, 1, 1.0);
    auto a = validate_spec(s, g), b = validate_spec(s, g);
    CHECK_FALSE(a.ok());
    CHECK(a.violations == b.violations);
    CHECK(a.warnings == b.warnings);
}

TEST_CASE("registry values") {
    CHECK(eval_potential(Potential::quadratic1(1.0), 0.0, {2.0}) == doctest::Approx(2.0));
    CHECK(eval_potential(Potential::zero(), 0.3, {7.0}) == 0.0);
    CHECK(eval_potential(Potential::linear({3.0}), 0.0, {0.5}) == doctest::Approx(1.5));
    CHECK(eval_gradient(Potential::quadratic1(1.0), 0.0, {2.0})[0] == doctest::Approx(2.0));
    CHECK(eval_gradient(Potential::constant(4.0), 0.0, {1.3})[0] == 0.0);
}

TEST_CASE("tabulated gradient by central differences") {
    auto t = std::make_shared<Table>();
    t->axes = {Axis{-2.0, 2.0, 4001}};
    for (int i = 0; i < 4001; ++i) {
        double x = t->axes[0].x(i);
        t->values.push_back(x * x);
    }
    Potential p = Potential::tabulated(t);
    CHECK(eval_gradient(p, 0.0, {1.0})[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK_THROWS_AS(eval_potential(p, 0.0, {3.0}), Error);
}

TEST_CASE("analytic gradients agree with finite differences") {
    std::vector<Potential> ps = {
        Potential::quadratic({2.0, 0.5, 0.5, 1.0}, {0.3, -0.2}, 0.1),
        Potential::linear({1.0, -2.0}),
        Potential::double_well(0.7, 1.2, 2),
        Potential::constant(3.0, 2),
    };
    const double h = 1e-4;
    std::vector<Vec> probes = {{0.4, -1.1}, {1.5, 0.2}, {-0.7, 0.9}};
    for (const auto& p : ps) {
        for (const auto& x : probes) {
            Vec g = eval_gradient(p, 0.0, x);
            for (int d = 0; d < 2; ++d) {
                Vec xp = x, xm = x;
                xp[d] += h;
                xm[d] -= h;
                double fd = (eval_potential(p, 0.0, xp) - eval_potential(p, 0.0, xm)) / (2 * h);
                CHECK(std::abs(fd - g[d]) <= 1e-6 * std::max(1.0, std::abs(g[d])));
            }
        }
    }
}

TEST_CASE("separable time scaling") {
    Potential p = Potential::quadratic1(2.0).with_time_scale({0.0, 1.0}, {0.0, 1.0});
    CHECK(p.value(0.5, 1.0) == doctest::Approx(0.5));
    CHECK(p.gradient(0.25, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("asymmetric quadratic matrix is a violation") {
    CostSpec s = testing::spec_with(1.0);
    s.dim = 2;
    s.running = Potential::quadratic({1.0, 0.5, 0.0, 1.0}, {0.0, 0.0});
    s.terminal = Potential::zero(2);
    SpaceTimeGrid g;
    g.axes = {Axis{-8, 8, 33}, Axis{-8, 8, 33}};
    g.n_t = 11;
    g.T = 1.0;
    CHECK_FALSE(validate_spec(s, g).ok());
}

TEST_CASE("path invariants") {
    Path p = uniform_path(1.0, 10, [](double t) { return t; });
    CHECK_NOTHROW(p.check());
    CHECK(p.times.front() == 0.0);
    CHECK(p.times.back() == 1.0);
    p.times[3] = p.times[2];
    CHECK_THROWS_AS(p.check(), Error);
}
