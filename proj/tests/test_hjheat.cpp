#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stl/hjheat.hpp"
#include "stl/oracle.hpp"

using namespace stl;

namespace {

SpaceTimeGrid std_grid() { return SpaceTimeGrid::line(-8, 8, 257, 1001, 1.0); }

double sup_window(const ScalarField& f, const std::function<double(double, double)>& exact, double half) {
    double m = 0.0;
    for (int k = 0; k < f.n_t; ++k)
        for (int i = 0; i < f.nx(); ++i) {
            double x = f.axes[0].x(i);
            if (std::abs(x) > half) continue;
            m = std::max(m, std::abs(f.at(k, i) - exact(f.t(k), x)));
        }
    return m;
}

}  // namespace

TEST_CASE("heat kernel values") {
    CHECK(heat_kernel(1.0, {0.0}, 1.0) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(heat_kernel(0.5, {1.0}, 2.0) == doctest::Approx(0.2419707).epsilon(1e-7));
    CHECK(heat_kernel(1.0, {0.0, 0.0}, 1.0) == doctest::Approx(0.1591549).epsilon(1e-7));
    CHECK_THROWS_AS(heat_kernel(0.0, {0.0}, 1.0), Error);
}

TEST_CASE("backward heat: trivial and constant potential") {
    CostSpec s = testing::spec_with(1.0);
    ScalarField phi = solve_backward_heat(s, std_grid());
    for (double v : phi.values) REQUIRE(v == doctest::Approx(1.0).epsilon(1e-14));

    s.running = Potential::constant(0.7);
    phi = solve_backward_heat(s, std_grid());
    double worst = 0.0;
    for (int k = 0; k < phi.n_t; ++k)
        for (int i = 0; i < phi.nx(); ++i) {
            double ex = std::exp(-0.7 * (1.0 - phi.t(k)));
            worst = std::max(worst, std::abs(phi.at(k, i) / ex - 1.0));
        }
    CHECK(worst <= 1e-6);
}

TEST_CASE("backward heat: linear terminal cost gives the Gaussian moment") {
    CostSpec s = testing::spec_with(1.0);
    s.terminal = Potential::linear({1.0});
    ScalarField phi = solve_backward_heat(s, SpaceTimeGrid::line(-12, 12, 385, 1001, 1.0));
    CHECK(phi.interp(0.0, 0.0) == doctest::Approx(1.6487213).epsilon(1e-4 / 1.6487213));
    for (int i = 0; i < phi.nx(); ++i) REQUIRE(phi.at(phi.n_t - 1, i) == std::exp(-phi.axes[0].x(i)));
}

TEST_CASE("forward heat: Gaussian convolution and constant potential") {
    const double sig2 = 0.5;
    CostSpec s = testing::spec_with(1.0);
    s.initial = Potential::quadratic1(1.0 / sig2, 0.0, 0.5 * std::log(2 * M_PI * sig2));
    ScalarField psi = solve_forward_heat(s, std_grid());
    double err = sup_window(psi, [&](double t, double x) { return testing::normal_pdf(x, 0.0, sig2 + t); }, 8.0);
    CHECK(err <= 1e-5);

    CostSpec c = testing::spec_with(1.0);
    c.initial = Potential::zero();
    c.running = Potential::constant(0.4);
    psi = solve_forward_heat(c, std_grid());
    err = sup_window(psi, [](double t, double) { return std::exp(-0.4 * t); }, 8.0);
    CHECK(err <= 1e-6);
}

TEST_CASE("forward heat requires an initial cost") {
    CHECK_THROWS_AS(solve_forward_heat(testing::spec_with(1.0), std_grid()), Error);
}

TEST_CASE("Feynman-Kac estimates") {
    CostSpec s = testing::spec_with(1.0);
    MCEstimate z = feynman_kac(0.0, {0.0}, s, 1000, 5, 20);
    CHECK(z.mean == 1.0);
    CHECK(z.std_error == 0.0);

    s.running = Potential::constant(2.0);
    z = feynman_kac(0.0, {0.0}, s, 1000, 5, 20);
    CHECK(z.mean == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(z.std_error == doctest::Approx(0.0));

    CostSpec l = testing::spec_with(1.0);
    l.terminal = Potential::linear({1.0});
    z = feynman_kac(0.0, {0.0}, l, 40000, 11, 10);
    CHECK(std::abs(z.mean - 1.6487213) <= 3 * z.std_error);
    CHECK(z.seed == 11);
}

TEST_CASE("solve_hj on the oracle cases") {
    CostSpec zero = testing::spec_with(1.0);
    ScalarField S = solve_hj(zero, std_grid());
    for (double v : S.values) REQUIRE(std::abs(v) < 1e-13);

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    S = solve_hj(lin, SpaceTimeGrid::line(-12, 12, 385, 1001, 1.0));
    CHECK(sup_window(S, [](double t, double x) { return -x + 0.5 * (1.0 - t); }, 6.0) <= 1e-5);

    CostSpec st = testing::stationary_pair(1.0, 1.0);
    S = solve_hj(st, std_grid());
    CHECK(sup_window(S, [](double, double x) { return -0.5 * x * x; }, 4.0) <= 1e-5);
}

TEST_CASE("solve_hj matches the frozen Riccati solution for a shifted terminal cost") {
    CostSpec s = testing::spec_with(1.0);
    s.terminal = Potential::quadratic1(1.0, -0.3, 0.055);
    ScalarField S = solve_hj(s, std_grid());
    auto ric = oracle::riccati_hj(1.0, {}, 1.0, 1.0, 4000, 0.3, 0.1);
    CHECK(sup_window(S, [&](double t, double x) { return ric.S(t, x); }, 4.0) <= 1e-4);
    // a(0) = 1/(1+1) for V=0, lambda=1
    double a, m, c;
    ric.coefficients(0.0, a, m, c);
    CHECK(a == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("solve_hj_reversed") {
    CostSpec zero = testing::spec_with(1.0);
    zero.initial = Potential::zero();
    ScalarField R = solve_hj_reversed(zero, std_grid());
    for (double v : R.values) REQUIRE(std::abs(v) < 1e-13);

    CostSpec lin = testing::spec_with(1.0);
    lin.initial = Potential::linear({1.0});
    R = solve_hj_reversed(lin, SpaceTimeGrid::line(-12, 12, 385, 1001, 1.0));
    CHECK(sup_window(R, [](double t, double x) { return -x + 0.5 * t; }, 6.0) <= 1e-5);

    CostSpec st = testing::stationary_pair(1.0, 1.0, 1.0);
    R = solve_hj_reversed(st, std_grid());
    CHECK(sup_window(R, [](double, double x) { return -0.5 * x * x; }, 4.0) <= 1e-5);
}

TEST_CASE("residuals") {
    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    ScalarField exact = ScalarField::space_time(FieldLabel::S, Axis{-4, 4, 129}, 201, 1.0);
    for (int k = 0; k < exact.n_t; ++k)
        for (int i = 0; i < exact.nx(); ++i) exact.at(k, i) = -exact.axes[0].x(i) + 0.5 * (1.0 - exact.t(k));
    CHECK(max_abs_interior(hj_residual(exact, lin)) <= 1e-12);
    CHECK(max_abs_interior(nh_residual(exact, lin)) <= 1e-10);

    ScalarField bumped = exact;
    for (int k = 0; k < bumped.n_t; ++k)
        for (int i = 0; i < bumped.nx(); ++i) bumped.at(k, i) += std::pow(bumped.axes[0].x(i), 2);
    CHECK(max_abs_interior(hj_residual(bumped, lin)) > 0.1);

    CostSpec zero = testing::spec_with(1.0);
    ScalarField S0 = solve_hj(zero, std_grid());
    CHECK(max_abs_interior(hj_residual(S0, zero)) <= 1e-10);
    CHECK(max_abs_interior(nh_residual(S0, zero)) <= 1e-10);

    CostSpec st = testing::stationary_pair(1.0, 1.0);
    ScalarField S = solve_hj(st, std_grid());
    CHECK(max_abs_interior(hj_residual(S, st), 4.0) <= 1e-3);
    CHECK(max_abs_interior(nh_residual(S, st), 4.0) <= 1e-3);
}

TEST_CASE("classical limit") {
    CostSpec zero = testing::spec_with(1.0);
    auto z = solve_hj_classical(zero, std_grid(), 0.5);
    CHECK(z.inf_om_at_x0 == doctest::Approx(0.0));
    for (double v : z.S0.values) REQUIRE(std::abs(v) < 1e-10);

    auto h = solve_hj_classical(testing::harmonic(), std_grid(), 1.0);
    CHECK(h.inf_om_at_x0 == doctest::Approx(std::tanh(1.0) / 2).epsilon(1e-6));
    CHECK(h.inf_om_at_x0 == doctest::Approx(0.3807971).epsilon(1e-6));

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    auto l = solve_hj_classical(lin, std_grid(), 0.0);
    double worst = 0.0;
    for (int k = 0; k < l.S0.n_t; ++k)
        for (int i = 0; i < l.S0.nx(); ++i) {
            double x = l.S0.axes[0].x(i);
            worst = std::max(worst, std::abs(l.S0.at(k, i) - (-x + 0.5 * (1.0 - l.S0.t(k)))));
        }
    CHECK(worst <= 1e-6);
}

TEST_CASE("small-noise convergence") {
    Vec eps = {0.5, 0.2, 0.1, 0.05};
    auto z = hj_smallnoise_convergence(testing::spec_with(1.0), SpaceTimeGrid::line(-4, 4, 129, 201, 1.0), eps);
    for (auto& r : z.rows) CHECK(r.gap <= 1e-10);

    CostSpec lin = testing::spec_with(1.0);
    lin.terminal = Potential::linear({1.0});
    auto l = hj_smallnoise_convergence(lin, SpaceTimeGrid::line(-6, 6, 769, 1001, 1.0), eps);
    for (auto& r : l.rows) CHECK(r.gap <= 1e-4);

    auto h = hj_smallnoise_convergence(testing::harmonic(), SpaceTimeGrid::line(-3, 3, 601, 1001, 1.0), eps);
    REQUIRE(h.rows.size() == 4);
    CHECK(h.monotone_decrease);
}
