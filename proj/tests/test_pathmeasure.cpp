#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stl/hjheat.hpp"
#include "stl/pathmeasure.hpp"
#include "stl/stats.hpp"

using namespace stl;

namespace {
SpaceTimeGrid std_grid() { return SpaceTimeGrid::line(-8, 8, 257, 1001, 1.0); }
}  // namespace

TEST_CASE("phi and psi functionals") {
    CostSpec zero = testing::spec_with(1.0);
    Path id = uniform_path(1.0, 1000, [](double t) { return t; });
    CHECK(phi_functional(id, zero) == 0.0);

    CHECK(phi_functional(id, testing::harmonic()) == doctest::Approx(1.0 / 6).epsilon(1e-5));

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    Path two = uniform_path(1.0, 10, [](double t) { return 2 * t; });
    CHECK(phi_functional(two, lin) == doctest::Approx(2.0));

    CostSpec f = testing::spec_with(1.0);
    f.initial = Potential::linear({1.0});
    CHECK(psi_functional(two, f) == doctest::Approx(2.0));

    // static V is reflection invariant
    CostSpec h = testing::harmonic();
    h.initial = Potential::zero();
    CHECK(psi_functional(id, h) == doctest::Approx(phi_functional(id, testing::harmonic())).epsilon(1e-12));

    CostSpec sep = testing::spec_with(1.0);
    sep.running = Potential::quadratic1(2.0).with_time_scale({0.0, 1.0}, {0.0, 1.0});
    sep.initial = Potential::zero();
    Path one = uniform_path(1.0, 1000, [](double) { return 1.0; });
    CHECK(psi_functional(one, sep) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("normalizing constants") {
    auto on_grid = ZMethod::on_grid(std_grid());
    CHECK(normalizing_constant({0.0}, testing::spec_with(1.0), on_grid) == doctest::Approx(0.0));

    CostSpec c = testing::spec_with(0.5);
    c.running = Potential::constant(0.3);
    CHECK(normalizing_constant({0.0}, c, on_grid) == doctest::Approx(-0.6).epsilon(1e-6));

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    auto wide = ZMethod::on_grid(SpaceTimeGrid::line(-12, 12, 385, 1001, 1.0));
    CHECK(normalizing_constant({0.0}, lin, wide) == doctest::Approx(0.5).epsilon(1e-4));

    double mc = normalizing_constant({0.0}, lin, ZMethod::monte_carlo(40000, 3, 20));
    CHECK(mc == doctest::Approx(0.5).epsilon(0.02));

    CostSpec lr = testing::spec_with(1.0);
    lr.initial = Potential::linear({1.0});
    CHECK(normalizing_constant_reversed({0.0}, lr, wide) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("Radon-Nikodym densities") {
    Path p = uniform_path(1.0, 100, [](double t) { return std::sin(3 * t); });
    CHECK(log_rn_nu_vs_mu(p, testing::spec_with(1.0), 0.0) == 0.0);

    CostSpec c = testing::spec_with(1.0);
    c.running = Potential::constant(0.8);
    CHECK(log_rn_nu_vs_mu(p, c, -0.8) == doctest::Approx(0.0).epsilon(1e-12));

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    Path back = uniform_path(1.0, 10, [](double t) { return t * (1 - t); });
    CHECK(log_rn_nu_vs_mu(back, lin, 0.5) == doctest::Approx(-0.5));

    CostSpec pair = testing::stationary_pair(1.0, 1.0, 1.0);
    CHECK(log_rn_forward_vs_reversed(p, pair, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

    CostSpec fg = testing::spec_with(1.0);
    fg.terminal = Potential::linear({1.0});
    fg.initial = Potential::zero();
    Path up = uniform_path(1.0, 10, [](double t) { return t; });
    CHECK(log_rn_forward_vs_reversed(up, fg, 0.5, 0.0) == doctest::Approx(-1.5));
}

TEST_CASE("Born marginals") {
    const double sig2 = 0.5;
    CostSpec g = testing::spec_with(1.0);
    g.initial = Potential::quadratic1(1.0 / sig2, 0.0, 0.5 * std::log(2 * M_PI * sig2));
    for (double t : {0.0, 0.4, 1.0}) {
        ScalarField rho = born_marginal(t, g, std_grid());
        double worst = 0.0;
        for (int i = 0; i < rho.nx(); ++i)
            worst = std::max(worst, std::abs(rho.values[i] - testing::normal_pdf(rho.axes[0].x(i), 0, sig2 + t)));
        CHECK(worst <= 1e-5);
    }

    CostSpec zero = testing::spec_with(1.0);
    zero.initial = Potential::zero();
    ScalarField u = born_marginal(0.5, zero, std_grid());
    for (double v : u.values) REQUIRE(v == doctest::Approx(1.0 / 16).epsilon(1e-9));

    CostSpec pair = testing::stationary_pair(1.0, 1.0, 1.0);
    for (double t : {0.0, 0.5, 1.0}) {
        ScalarField rho = born_marginal(t, pair, std_grid());
        double worst = 0.0;
        for (int i = 0; i < rho.nx(); ++i)
            worst = std::max(worst, std::abs(rho.values[i] - testing::normal_pdf(rho.axes[0].x(i), 0, 0.5)));
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("KL disintegration estimator") {
    CostSpec pair = testing::stationary_pair(1.0, 1.0);
    auto bm_drift = DriftSpec::zero();
    auto bm = simulate(bm_drift, InitialCondition::point({0.0}), pair, {1.0, 500}, 20000, 31);
    KlInputs in;
    in.ensemble = &bm;
    in.trial_drift = &bm_drift;
    in.logZ = 0.0;  // S(0,0) = 0 for the stationary pair
    KlReport r = kl_divergence(in, pair);
    CHECK(std::abs(r.estimate.mean - 0.25) <= 3 * r.estimate.std_error);
    CHECK(r.estimate.mean >= -3 * r.estimate.std_error);

    auto target = DriftSpec::linear({-1.0}, 1);
    auto ou = simulate(target, InitialCondition::point({0.0}), pair, {1.0, 500}, 20000, 32);
    KlInputs same;
    same.ensemble = &ou;
    same.trial_drift = &target;
    same.target_drift = &target;
    KlReport z = kl_divergence(same, pair);
    CHECK(std::abs(z.estimate.mean) <= 3 * z.estimate.std_error + 1e-3);
    REQUIRE(z.cross_check);
    CHECK(z.cross_check->mean == doctest::Approx(0.0));

    KlInputs dens = in;
    dens.trial_init_logdensity = [](double) { return 0.0; };
    CHECK_THROWS_AS(kl_divergence(dens, pair), Error);
}
