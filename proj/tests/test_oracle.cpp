#include "doctest.h"

#include <cmath>

#include "stl/error.hpp"
#include "stl/oracle.hpp"

using namespace stl;
using namespace stl::oracle;

TEST_CASE("Riccati: stationary pair, zero data and free decay") {
    for (double eps : {0.3, 1.0}) {
        auto r = riccati_hj(1.5, {0.5 * 1.5 * 1.5, 0.0, -0.5 * eps * 1.5}, eps, 1.0, 2000);
        for (size_t k = 0; k < r.t.size(); ++k) {
            REQUIRE(r.a[k] == doctest::Approx(1.5).epsilon(1e-12));
            REQUIRE(std::abs(r.c[k]) <= 1e-12);
        }
    }
    auto z = riccati_hj(0.0, {}, 1.0, 1.0, 100);
    for (size_t k = 0; k < z.t.size(); ++k) REQUIRE((z.a[k] == 0.0 && z.m[k] == 0.0 && z.c[k] == 0.0));

    auto f = riccati_hj(2.0, {}, 0.7, 1.0, 4000);
    for (double t : {0.0, 0.25, 0.8}) {
        double a, m, c;
        f.coefficients(t, a, m, c);
        CHECK(a == doctest::Approx(2.0 / (1.0 + 2.0 * (1.0 - t))).epsilon(1e-10));
    }
}

TEST_CASE("Riccati: focal blow-up is an oracle error") {
    CHECK_THROWS_AS(riccati_hj(-3.0, {}, 1.0, 1.0, 1000), Error);
}

TEST_CASE("Riccati: harmonic matches the closed form") {
    auto r = riccati_hj(0.0, {0.5, 0.0, 0.0}, 1.0, 1.0, 4000);
    for (double t : {0.0, 0.5}) {
        for (double x : {-1.0, 0.3, 2.0}) CHECK(r.S(t, x) == doctest::Approx(harmonic_S(1.0, 1.0, t, x)).epsilon(1e-9));
    }
    CHECK(harmonic_inf_om(1.0, 1.0) == doctest::Approx(0.3807971).epsilon(1e-7));
    CHECK(harmonic_path(1.0, 1.0, 1.0) == doctest::Approx(0.6480543).epsilon(1e-7));
    CHECK(harmonic_velocity(1.0, 1.0, 0.0) == doctest::Approx(-0.7615942).epsilon(1e-7));
}

TEST_CASE("Lyapunov") {
    auto ou = lyapunov_gaussian({-1.0}, 1, 1.0, 1.0, {0.0}, {1.0}, 1000, true);
    CHECK(ou.stationary_cov[0] == doctest::Approx(0.5));
    CHECK(ou.epr_rate == doctest::Approx(0.0));

    auto rot = lyapunov_gaussian({-1.0, -1.0, 1.0, -1.0}, 2, 1.0, 1.0, {0, 0}, {0.5, 0, 0, 0.5}, 1000, true);
    CHECK(rot.stationary_cov[0] == doctest::Approx(0.5));
    CHECK(std::abs(rot.stationary_cov[1]) <= 1e-12);
    CHECK(rot.epr_rate == doctest::Approx(2.0));

    auto heat = lyapunov_gaussian({0.0}, 1, 2.0, 1.0, {0.0}, {0.3}, 100, false);
    CHECK(heat.cov.back()[0] == doctest::Approx(2.3).epsilon(1e-12));

    CHECK_THROWS_AS(lyapunov_gaussian({1.0}, 1, 1.0, 1.0, {0.0}, {1.0}, 10, true), Error);
}

TEST_CASE("Gaussian expectations") {
    CHECK(gaussian_mgf({1.0}, {0.0}, {1.0}) == doctest::Approx(1.6487213).epsilon(1e-7));
    CHECK(gaussian_mgf({0.0}, {3.0}, {2.0}) == 1.0);
    CHECK(gaussian_quadratic_form({1, 0, 0, 1}, {0, 0}, {0.35, 0, 0, 0.35}) == doctest::Approx(0.7));
}

TEST_CASE("brute-force scaling") {
    const int n = 40;
    const double dx = 0.1;
    Vec x(n), w(n, dx), K(n * n), u(n);
    for (int i = 0; i < n; ++i) x[i] = -2.0 + i * dx;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K[i * n + j] = std::exp(-0.5 * (x[i] - x[j]) * (x[i] - x[j]));
    for (int i = 0; i < n; ++i) u[i] = 1.0 / (n * dx);
    auto p = brute_force_ipfp(K, w, u, u, 1.0, 1e-13);
    // equal up to the gauge constant
    for (int i = 0; i < n; ++i) CHECK(std::abs((p.f[i] - p.g[i]) - (p.f[0] - p.g[0])) <= 1e-10);

    // reference fixed point: rhoT = K-push of rho0 gives constant g
    // with a row-normalised transition, as the grid kernel is
    Vec r0(n), rT(n, 0.0), rows(n, 0.0);
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += (r0[i] = std::exp(-x[i] * x[i])) * dx;
    for (double& v : r0) v /= m;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows[i] += w[j] * K[i * n + j];
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) rT[j] += w[i] * r0[i] * K[i * n + j] / rows[i];
    auto q = brute_force_ipfp(K, w, r0, rT, 1.0, 1e-12);
    double lo = 1e300, hi = -1e300;
    for (double v : q.g) lo = std::min(lo, v), hi = std::max(hi, v);
    CHECK(hi - lo <= 1e-8);
}
