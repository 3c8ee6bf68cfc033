#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stl/entropy.hpp"
#include "stl/hjheat.hpp"
#include "stl/sde.hpp"
#include "stl/stats.hpp"

using namespace stl;

TEST_CASE("Brownian moments") {
    CostSpec s = testing::spec_with(1.0);
    auto e = simulate(DriftSpec::zero(), InitialCondition::point({0.0}), s, {1.0, 200}, 20000, 3);
    MeanSE m = mean_se(e.terminal());
    CHECK(std::abs(m.mean) <= 3 * m.se);
    double var = m.se * m.se * m.n;
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("deterministic limit follows the ODE") {
    CostSpec s = testing::spec_with(0.0);
    auto e = simulate(DriftSpec::linear({-1.0}, 1), InitialCondition::point({1.0}), s, {1.0, 1000}, 1, 1);
    double worst = 0.0;
    for (int k = 0; k < e.n_times(); ++k) worst = std::max(worst, std::abs(*e.at(0, k) - std::exp(-e.times[k])));
    CHECK(worst <= 1e-3);
}

TEST_CASE("OU relaxes to variance eps/2") {
    CostSpec s = testing::spec_with(1.0, 3.0);
    auto e = simulate(DriftSpec::linear({-1.0}, 1), InitialCondition::point({0.0}), s, {3.0, 3000}, 20000, 9,
                      {.record_stride = 3000});
    Vec xs = e.terminal();
    Vec sq(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) sq[i] = xs[i] * xs[i];
    MeanSE v = mean_se(sq);
    // exact Var at T=3 is (1 - e^{-6})/2
    CHECK(std::abs(v.mean - 0.5 * (1 - std::exp(-6.0))) <= 3 * v.se);
}

TEST_CASE("simulation is reproducible and batch-invariant") {
    CostSpec s = testing::spec_with(1.0);
    auto drift = DriftSpec::linear({-0.5}, 1);
    auto a = simulate(drift, InitialCondition::point({0.2}), s, {1.0, 100}, 64, 77);
    auto b = simulate(drift, InitialCondition::point({0.2}), s, {1.0, 100}, 64, 77);
    CHECK(a.states == b.states);
    auto tail = simulate(drift, InitialCondition::point({0.2}), s, {1.0, 100}, 32, 77, {.stream_offset = 32});
    CHECK(*tail.at(0, 100) == *a.at(32, 100));
    CHECK(tail.path_ids.front() == 32);
}

TEST_CASE("escaped paths beyond the limit are an error") {
    CostSpec s = testing::spec_with(1.0);
    auto drift = DriftSpec::linear({0.0}, 1);
    drift.box = Window{{-0.5}, {0.5}};
    CHECK_THROWS_AS(simulate(drift, InitialCondition::point({0.0}), s, {1.0, 100}, 200, 1), Error);
}

TEST_CASE("time reversal: stationary gradient case keeps the marginal") {
    CostSpec s = testing::spec_with(1.0);
    auto drift = DriftSpec::linear({-1.0}, 1);
    auto rho = evolve_gaussian(drift, {0.0}, {0.5}, s, 101);
    auto rev = simulate_time_reversed(drift, rho, s, {1.0, 400}, 20000, 5);
    double ks = ks_against_cdf(rev.terminal(), [](double x) { return normal_cdf(x, 0.0, 0.5); });
    CHECK(ks <= 0.02);
}

TEST_CASE("time reversal: heat flow returns to N(0,1)") {
    CostSpec s = testing::spec_with(1.0);
    auto drift = DriftSpec::zero();
    auto rho = evolve_gaussian(drift, {0.0}, {1.0}, s, 101);
    auto rev = simulate_time_reversed(drift, rho, s, {1.0, 400}, 20000, 6);
    double ks = ks_against_cdf(rev.terminal(), [](double x) { return normal_cdf(x, 0.0, 1.0); });
    CHECK(ks <= 0.02);

    CostSpec z = testing::spec_with(0.0);
    CHECK_THROWS_AS(simulate_time_reversed(drift, rho, z, {1.0, 400}, 10, 6), Error);
}

TEST_CASE("Girsanov weights") {
    CostSpec s = testing::spec_with(1.0);
    Path p = uniform_path(1.0, 10, [](double t) { return std::sin(t); });
    CHECK(girsanov_log_weight(p, DriftSpec::zero(), s) == 0.0);

    // martingale property under Brownian sampling
    auto bm = simulate(DriftSpec::zero(), InitialCondition::point({0.0}), s, {1.0, 200}, 20000, 21);
    auto c = DriftSpec::linear({0.0}, 1, {0.7});
    Vec w(bm.n_paths);
    for (int i = 0; i < bm.n_paths; ++i) w[i] = std::exp(girsanov_log_weight(bm.path(i), c, s));
    MeanSE m = mean_se(w);
    CHECK(std::abs(m.mean - 1.0) <= 3 * m.se);

    // reweighting OU paths back to Wiener measure: E[X_T^2] = 1
    auto ou = DriftSpec::linear({-1.0}, 1);
    auto e = simulate(ou, InitialCondition::point({0.0}), s, {1.0, 500}, 20000, 22);
    Vec h(e.n_paths);
    for (int i = 0; i < e.n_paths; ++i) {
        double x = *e.at(i, e.n_times() - 1);
        h[i] = std::exp(-girsanov_log_weight(e.path(i), ou, s)) * x * x;
    }
    MeanSE r = mean_se(h);
    CHECK(std::abs(r.mean - 1.0) <= 3 * r.se);
}

TEST_CASE("pathwise identity residual") {
    CostSpec zero = testing::spec_with(1.0);
    ScalarField S = solve_hj(zero, SpaceTimeGrid::line(-8, 8, 129, 101, 1.0));
    Path p = uniform_path(1.0, 100, [](double t) { return 0.3 * t; });
    CHECK(std::abs(pathwise_identity_residual(p, S, zero, 0.0)) <= 1e-15);

    // linear case: gradient is exact, residual is the discretisation error only
    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    auto grad = DriftSpec::linear({0.0}, 1, {-1.0});
    auto bm = simulate(DriftSpec::zero(), InitialCondition::point({0.0}), lin, {1.0, 1000}, 500, 4);
    double worst = 0.0;
    for (int i = 0; i < bm.n_paths; ++i)
        worst = std::max(worst, std::abs(pathwise_identity_residual(bm.path(i), grad, lin, 0.5)));
    CHECK(worst <= 1e-10);

    // S = +g does not solve the equation
    auto wrong = DriftSpec::linear({0.0}, 1, {1.0});
    double mean_abs = 0.0;
    for (int i = 0; i < bm.n_paths; ++i) mean_abs += std::abs(pathwise_identity_residual(bm.path(i), wrong, lin, 0.5));
    CHECK(mean_abs / bm.n_paths > 0.1);
}
