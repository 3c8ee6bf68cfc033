#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stl/hjheat.hpp"
#include "stl/om.hpp"
#include "stl/oracle.hpp"

using namespace stl;

TEST_CASE("OM functional") {
    CostSpec zero = testing::spec_with(1.0);
    CHECK(om_functional(uniform_path(1.0, 100, [](double) { return 0.7; }), zero) == 0.0);
    CHECK(om_functional(uniform_path(1.0, 100, [](double t) { return 3 * t; }), zero) == doctest::Approx(4.5));
    CHECK(om_functional(uniform_path(1.0, 1000, [](double t) { return t; }), testing::harmonic()) ==
          doctest::Approx(2.0 / 3).epsilon(1e-5));
}

TEST_CASE("Lagrangian and Hamiltonian") {
    CostSpec zero = testing::spec_with(1.0);
    CHECK(lagrangian(zero, 0, {0.0}, {2.0}) == doctest::Approx(2.0));
    CHECK(hamiltonian(zero, 0, {0.0}, {2.0}) == doctest::Approx(2.0));
    CostSpec h = testing::harmonic();
    CHECK(lagrangian(h, 0, {1.0}, {0.0}) == doctest::Approx(0.5));
    CHECK(hamiltonian(h, 0, {1.0}, {0.0}) == doctest::Approx(-0.5));
    CHECK(lagrangian(h, 0, {1.0}, {1.0}) + hamiltonian(h, 0, {1.0}, {1.0}) == doctest::Approx(1.0));
}

TEST_CASE("shooting") {
    auto z = solve_euler_lagrange({0.4}, testing::spec_with(1.0), 1e-10);
    CHECK(z.value == doctest::Approx(0.0));
    for (int k = 0; k < z.path.size(); ++k) REQUIRE(z.path.x(k) == doctest::Approx(0.4));

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    auto l = solve_euler_lagrange({0.0}, lin, 1e-10);
    CHECK(l.value == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(l.path.x(l.path.size() - 1) == doctest::Approx(-1.0).epsilon(1e-9));

    auto h = solve_euler_lagrange({1.0}, testing::harmonic(), 1e-12);
    CHECK(h.value == doctest::Approx(0.3807971).epsilon(1e-7));
    CHECK(h.path.x(h.path.size() - 1) == doctest::Approx(0.6480543).epsilon(1e-7));
    CHECK(h.initial_velocity[0] == doctest::Approx(-0.7615942).epsilon(1e-7));
    double worst = 0.0;
    for (int k = 0; k < h.path.size(); ++k)
        worst = std::max(worst, std::abs(h.path.x(k) - oracle::harmonic_path(1.0, 1.0, h.path.times[k])));
    CHECK(worst <= 1e-6);
}

TEST_CASE("shooting reports non-convergence") {
    CostSpec dw = testing::spec_with(1.0);
    dw.running = Potential::double_well(1.0, 1.0);
    dw.terminal = Potential::quadratic1(5.0, 2.0);
    CHECK_THROWS_AS(solve_euler_lagrange({0.1}, dw, 1e-14, {.n_steps = 200, .max_iter = 1}), Error);
}

TEST_CASE("direct minimisation") {
    auto z = minimize_om_direct({0.3}, testing::spec_with(1.0), 50, 1e-10);
    CHECK(z.value == doctest::Approx(0.0).epsilon(1e-12));

    auto d = minimize_om_direct({1.0}, testing::harmonic(), 200, 1e-10);
    CHECK(std::abs(d.value - std::tanh(1.0) / 2) <= 1e-5);
    auto s = solve_euler_lagrange({1.0}, testing::harmonic(), 1e-12, {.n_steps = 1000});
    double worst = 0.0;
    for (int k = 0; k < d.path.size(); ++k)
        worst = std::max(worst, std::abs(d.path.x(k) - oracle::harmonic_path(1.0, 1.0, d.path.times[k])));
    CHECK(worst <= 1e-4);

    CostSpec dw = testing::spec_with(1.0);
    dw.running = Potential::double_well(1.0, 1.0);
    dw.terminal = Potential::quadratic1(1.0, 1.0);
    auto m = minimize_om_direct({-1.0}, dw, 100, 1e-8, {.multistart = 2});
    CHECK(m.value <= om_functional(straight_line_initial({-1.0}, dw, 100), dw) + 1e-12);
}

TEST_CASE("rate function") {
    CostSpec h = testing::harmonic();
    double inf_om = std::tanh(1.0) / 2;
    auto s = solve_euler_lagrange({1.0}, h, 1e-12, {.n_steps = 4000});
    CHECK(std::abs(rate_function(s.path, {1.0}, h, inf_om)) <= 1e-8);
    Path flat = uniform_path(1.0, 1000, [](double) { return 1.0; });
    CHECK(rate_function(flat, {1.0}, h, inf_om) == doctest::Approx(0.1192029).epsilon(1e-6));
    CHECK_THROWS_AS(rate_function(flat, {1.0}, h, 1.0), Error);
}

TEST_CASE("Freidlin-Wentzell identity") {
    CostSpec h = testing::harmonic();
    auto grid = SpaceTimeGrid::line(-3, 3, 257, 1001, 1.0);
    auto cl = solve_hj_classical(h, grid, 1.0);
    auto s = solve_euler_lagrange({1.0}, h, 1e-12);
    CHECK(fw_om_identity_check(s.path, cl.S0, h, cl.inf_om_at_x0) <= 1e-6);
    Path flat = uniform_path(1.0, 1000, [](double) { return 1.0; });
    CHECK(fw_om_identity_check(flat, cl.S0, h, cl.inf_om_at_x0) <= 1e-3);

    CostSpec zero = testing::spec_with(1.0);
    auto z = solve_hj_classical(zero, grid, 0.0);
    Path wiggle = uniform_path(1.0, 100, [](double t) { return std::sin(4 * t); });
    CHECK(fw_om_identity_check(wiggle, z.S0, zero, 0.0) <= 1e-10);
}

TEST_CASE("eps log Z asymptotics") {
    Vec eps = {0.5, 0.2, 0.1, 0.05};
    LdpOptions o;
    o.grid = SpaceTimeGrid::line(-2, 3, 401, 1001, 1.0);
    auto z = ldp_z_asymptotics({0.0}, testing::spec_with(1.0), eps, o);
    for (auto& r : z.rows) CHECK(r.eps_log_z == doctest::Approx(0.0));

    CostSpec c = testing::spec_with(1.0);
    c.running = Potential::constant(0.6);
    auto k = ldp_z_asymptotics({0.0}, c, eps, o);
    // exact up to the Crank-Nicolson time error, which grows like 1/eps^2
    for (auto& r : k.rows) CHECK(std::abs(r.eps_log_z + 0.6) <= 1e-5);
    CHECK(k.target == doctest::Approx(-0.6));

    o.grid = SpaceTimeGrid::line(-2, 3, 801, 1001, 1.0);
    auto h = ldp_z_asymptotics({1.0}, testing::harmonic(), eps, o);
    CHECK(std::abs(h.extrapolated / -0.3807971 - 1.0) <= 0.05);
}
