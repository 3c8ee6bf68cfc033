#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stl/entropy.hpp"
#include "stl/hjheat.hpp"
#include "stl/stats.hpp"

using namespace stl;

namespace {

ScalarField gaussian_field(const Axis& ax, double var) {
    ScalarField f = ScalarField::space(FieldLabel::rho, {ax});
    f.values.resize(ax.n);
    for (int i = 0; i < ax.n; ++i) f.values[i] = testing::normal_pdf(ax.x(i), 0.0, var);
    return f;
}

EntropyLedger gaussian_ledger(const DriftSpec& b, const Vec& m0, const Vec& c0, const CostSpec& s, int n, int steps,
                              unsigned long long seed) {
    auto rho = evolve_gaussian(b, m0, c0, s, steps + 1);
    auto e = simulate(b, InitialCondition::gaussian(m0, c0), s, {s.horizon, steps}, n, seed);
    return entropy_ledger(e, rho, b, s);
}

}  // namespace

TEST_CASE("FPE grid route") {
    CostSpec s = testing::spec_with(1.0);
    // second order in space, so a finer axis than the HJ tests
    auto grid = SpaceTimeGrid::line(-8, 8, 1025, 1001, 1.0);
    auto heat = evolve_fpe(gaussian_field(grid.x(), 0.5), DriftSpec::zero(), s, grid);
    double worst = 0.0, mass = 0.0;
    for (int k = 0; k < heat.rho().n_t; ++k) {
        for (int i = 0; i < heat.rho().nx(); ++i)
            worst = std::max(worst, std::abs(heat.rho().at(k, i) -
                                             testing::normal_pdf(grid.x().x(i), 0, 0.5 + heat.rho().t(k))));
        mass = std::max(mass, std::abs(trapezoid(heat.rho().slice_ptr(k), grid.x().n, grid.x().dx()) - 1.0));
    }
    CHECK(worst <= 1e-5);
    CHECK(mass <= 1e-6);

    auto ou = evolve_fpe(gaussian_field(grid.x(), 0.5), DriftSpec::linear({-1.0}, 1), s, grid);
    worst = 0.0;
    for (int k = 0; k < ou.rho().n_t; ++k)
        for (int i = 0; i < ou.rho().nx(); ++i)
            worst = std::max(worst, std::abs(ou.rho().at(k, i) - ou.rho().at(0, i)));
    CHECK(worst <= 1e-6);
}

TEST_CASE("current and velocity") {
    CostSpec s = testing::spec_with(1.0);
    Axis ax{-6, 6, 481};
    auto cv = current_and_velocity(gaussian_field(ax, 0.5), DriftSpec::linear({-1.0}, 1), s);
    CHECK(max_abs_interior(cv.v, 3.0, 2) <= 1e-6);

    ScalarField r = gaussian_field(ax, 1.3);
    auto hf = current_and_velocity(r, DriftSpec::zero(), s);
    double worst = 0.0;
    for (int i = 2; i < ax.n - 2; ++i) {
        double x = ax.x(i);
        double exact = 0.5 * x / 1.3 * r.values[i];  // -(eps/2) rho'
        worst = std::max(worst, std::abs(hf.j.values[i] - exact));
    }
    CHECK(worst <= 1e-4);

    // rotational OU at stationarity: v = w J x
    CostSpec s2 = testing::spec_with(1.0);
    s2.dim = 2;
    const double w = 1.0;
    auto b = DriftSpec::linear({-1.0, -w, w, -1.0}, 2);
    auto rho = evolve_gaussian(b, {0, 0}, {0.5, 0, 0, 0.5}, s2, 11);
    double x[2] = {0.7, -0.4}, v[2];
    velocity_at(rho, b, s2, 0.3, x, v);
    CHECK(v[0] == doctest::Approx(-w * x[1]).epsilon(1e-10));
    CHECK(v[1] == doctest::Approx(w * x[0]).epsilon(1e-10));
}

TEST_CASE("EPR quadrature") {
    CostSpec s = testing::spec_with(1.0);
    auto eq = DriftSpec::linear({-1.0}, 1);
    CHECK(std::abs(epr_quadrature(evolve_gaussian(eq, {0.0}, {0.5}, s, 1001), eq, s)) <= 1e-8);

    CostSpec s2 = testing::spec_with(1.0);
    s2.dim = 2;
    auto rot = DriftSpec::linear({-1.0, -1.0, 1.0, -1.0}, 2);
    CHECK(epr_quadrature(evolve_gaussian(rot, {0, 0}, {0.5, 0, 0, 0.5}, s2, 1001), rot, s2) ==
          doctest::Approx(2.0).epsilon(1e-6));

    // frozen: 3/4 - log(2)/2 and a one-dimensional quadrature of the relaxing variance
    auto zero = DriftSpec::zero();
    CHECK(epr_quadrature(evolve_gaussian(zero, {0.0}, {1.0}, s, 1001), zero, s) ==
          doctest::Approx(0.4034264).epsilon(1e-5));
    CHECK(epr_quadrature(evolve_gaussian(eq, {0.0}, {1.0}, s, 1001), eq, s) ==
          doctest::Approx(0.1184787).epsilon(1e-5));
}

TEST_CASE("ledger: zero drift on a flat density") {
    CostSpec s = testing::spec_with(1.0, 0.01);
    auto grid = SpaceTimeGrid::line(-50, 50, 201, 11, 0.01);
    ScalarField flat = ScalarField::space(FieldLabel::rho, {grid.x()});
    flat.values.assign(grid.x().n, 0.01);
    auto rho = evolve_fpe(flat, DriftSpec::zero(), s, grid);
    auto e = simulate(DriftSpec::zero(), InitialCondition::point({0.0}), s, {0.01, 10}, 200, 1);
    auto L = entropy_ledger(e, rho, DriftSpec::zero(), s);
    for (double v : L.ds_tot) REQUIRE(std::abs(v) <= 1e-8);
}

TEST_CASE("ledger: equilibrium, rotational and relaxing regimes") {
    CostSpec s = testing::spec_with(1.0);
    auto eq = gaussian_ledger(DriftSpec::linear({-1.0}, 1), {0.0}, {0.5}, s, 2000, 500, 3);
    CHECK(std::abs(eq.total.mean) <= 3 * std::max(eq.total.se, 1e-12));
    CHECK(second_law_check(eq).pass);
    CHECK(ift_check(eq).pass);
    CHECK(eq.max_identity_error <= 1e-10);

    CostSpec s2 = testing::spec_with(1.0);
    s2.dim = 2;
    auto rot = gaussian_ledger(DriftSpec::linear({-1.0, -1.0, 1.0, -1.0}, 2), {0, 0}, {0.5, 0, 0, 0.5}, s2, 4000,
                               1000, 4);
    CHECK(std::abs(rot.total.mean - 2.0) <= std::max(0.1, 3 * rot.total.se));
    CHECK(second_law_check(rot).pass);

    auto rel = gaussian_ledger(DriftSpec::linear({-1.0}, 1), {0.0}, {1.0}, s, 4000, 1000, 5);
    CHECK(rel.total.mean > 0.0);
    CHECK(second_law_check(rel).pass);

    CostSpec sh = testing::spec_with(1.0, 0.25);
    auto rel_short = gaussian_ledger(DriftSpec::linear({-1.0}, 1), {0.0}, {1.0}, sh, 4000, 250, 6);
    CHECK(ift_check(rel_short).pass);
}

TEST_CASE("trajectory log-RN equals the ledger total") {
    CostSpec s = testing::spec_with(1.0);
    auto b = DriftSpec::zero();
    auto rho = evolve_gaussian(b, {0.0}, {1.0}, s, 1001);
    auto e = simulate(b, InitialCondition::gaussian({0.0}, {1.0}), s, {1.0, 1000}, 200, 8);
    auto L = entropy_ledger(e, rho, b, s);
    double rms = 0.0;
    for (int i = 0; i < e.n_paths; ++i) {
        double d = log_rn_traj(e.path(i), rho, b, s) - L.ds_tot[i];
        rms += d * d;
    }
    rms = std::sqrt(rms / e.n_paths);
    CHECK(rms <= 2 * std::sqrt(1e-3));
}

TEST_CASE("second law flags a negative mean") {
    EntropyLedger L;
    L.ds_tot = {-1.0, -1.1, -0.9, -1.0};
    L.total = mean_se(L.ds_tot);
    CHECK_FALSE(second_law_check(L).pass);
    CHECK_FALSE(ift_check(L).pass);
}

TEST_CASE("total entropy from the HJ pair") {
    auto grid = SpaceTimeGrid::line(-8, 8, 257, 1001, 1.0);
    CostSpec pair = testing::stationary_pair(1.0, 1.0, 1.0);
    ScalarField S = solve_hj(pair, grid), R = solve_hj_reversed(pair, grid);
    Path p = uniform_path(1.0, 100, [](double t) { return std::sin(2 * t); });
    Vec st = total_entropy_from_hj(p, S, R, pair);
    CHECK(std::abs(st.back() - st.front()) <= 1e-4);

    CostSpec zero = testing::spec_with(1.0);
    zero.initial = Potential::zero();
    Vec z = total_entropy_from_hj(p, solve_hj(zero, grid), solve_hj_reversed(zero, grid), zero);
    for (double v : z) REQUIRE(std::abs(v) <= 1e-12);

    CostSpec other = pair;
    other.terminal = Potential::quadratic1(2.0);
    CHECK_THROWS_AS(total_entropy_from_hj(p, S, R, other), Error);
}
