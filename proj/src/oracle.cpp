#include "stl/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "stl/error.hpp"

namespace stl::oracle {

namespace {

void rhs(bool reversed, double a, double m, double v2, double v1, double v0, double eps, double& da, double& dm,
         double& dc) {
    if (!reversed) {
        da = a * a - 2.0 * v2;
        dm = a * m + v1;
        dc = v0 - 0.5 * m * m + 0.5 * eps * a;
    } else {
        da = 2.0 * v2 - a * a;
        dm = -a * m - v1;
        dc = 0.5 * m * m - 0.5 * eps * a - v0;
    }
}

}  // namespace

RiccatiSolution riccati_solve(double a_end, double m_end, double c_end, double v2, double v1, double v0,
                              double epsilon, double T, int n_steps, bool reversed) {
    if (n_steps < 1) fail(ErrorKind::Oracle, "n_steps must be positive");
    RiccatiSolution s;
    s.epsilon = epsilon;
    s.reversed = reversed;
    const int n = n_steps;
    s.t.resize(n + 1);
    s.a.resize(n + 1);
    s.m.resize(n + 1);
    s.c.resize(n + 1);
    s.da.resize(n + 1);
    s.dm.resize(n + 1);
    s.dc.resize(n + 1);
    for (int k = 0; k <= n; ++k) s.t[k] = k == n ? T : T * k / n;
    // forward equation is known at T and marched to 0; reversed at 0 marched to T
    int k0 = reversed ? 0 : n, dir = reversed ? 1 : -1;
    double h = dir * T / n;
    double a = a_end, m = m_end, c = c_end;
    auto store = [&](int k) {
        s.a[k] = a;
        s.m[k] = m;
        s.c[k] = c;
        rhs(reversed, a, m, v2, v1, v0, epsilon, s.da[k], s.dm[k], s.dc[k]);
    };
    store(k0);
    for (int j = 1; j <= n; ++j) {
        double ka[4], km[4], kc[4];
        double aa = a, mm = m;
        rhs(reversed, aa, mm, v2, v1, v0, epsilon, ka[0], km[0], kc[0]);
        aa = a + 0.5 * h * ka[0];
        mm = m + 0.5 * h * km[0];
        rhs(reversed, aa, mm, v2, v1, v0, epsilon, ka[1], km[1], kc[1]);
        aa = a + 0.5 * h * ka[1];
        mm = m + 0.5 * h * km[1];
        rhs(reversed, aa, mm, v2, v1, v0, epsilon, ka[2], km[2], kc[2]);
        aa = a + h * ka[2];
        mm = m + h * km[2];
        rhs(reversed, aa, mm, v2, v1, v0, epsilon, ka[3], km[3], kc[3]);
        a += h / 6.0 * (ka[0] + 2 * ka[1] + 2 * ka[2] + ka[3]);
        m += h / 6.0 * (km[0] + 2 * km[1] + 2 * km[2] + km[3]);
        c += h / 6.0 * (kc[0] + 2 * kc[1] + 2 * kc[2] + kc[3]);
        if (!std::isfinite(a) || std::abs(a) > 1e12)
            fail(ErrorKind::Oracle, "Riccati coefficient blew up (focal time inside the horizon)");
        store(k0 + dir * j);
    }
    return s;
}

RiccatiSolution riccati_hj(double lambda_terminal, const QuadraticV& V, double epsilon, double T, int n_steps,
                           double g1, double g0) {
    return riccati_solve(lambda_terminal, -g1, -g0, V.v2, V.v1, V.v0, epsilon, T, n_steps, false);
}

RiccatiSolution riccati_hj_reversed(double kappa_initial, const QuadraticV& V, double epsilon, double T, int n_steps,
                                    double f1, double f0) {
    return riccati_solve(kappa_initial, -f1, -f0, V.v2, V.v1, V.v0, epsilon, T, n_steps, true);
}

void RiccatiSolution::coefficients(double time, double& a_out, double& m_out, double& c_out) const {
    const int n = static_cast<int>(t.size()) - 1;
    double T = t.back();
    double s = std::clamp(time / T * n, 0.0, static_cast<double>(n));
    int k = std::min(static_cast<int>(s), n - 1);
    double h = t[k + 1] - t[k];
    double u = (time - t[k]) / h;
    // cubic Hermite with the ODE right-hand side as derivative data
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    auto herm = [&](const Vec& y, const Vec& dy) {
        return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1];
    };
    a_out = herm(a, da);
    m_out = herm(m, dm);
    c_out = herm(c, dc);
}

double RiccatiSolution::S(double time, double x) const {
    double aa, mm, cc;
    coefficients(time, aa, mm, cc);
    return -0.5 * aa * x * x + mm * x + cc;
}

double RiccatiSolution::dSdx(double time, double x) const {
    double aa, mm, cc;
    coefficients(time, aa, mm, cc);
    return -aa * x + mm;
}

LyapunovResult lyapunov_gaussian(const Vec& A, int d, double epsilon, double T, const Vec& m0, const Vec& cov0,
                                 int n_steps, bool stationary) {
    using Mat = Eigen::MatrixXd;
    using V = Eigen::VectorXd;
    if (static_cast<int>(A.size()) != d * d || static_cast<int>(m0.size()) != d || static_cast<int>(cov0.size()) != d * d)
        fail(ErrorKind::Oracle, "Lyapunov oracle shape mismatch");
    Mat Am = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(A.data(), d, d);
    LyapunovResult r;
    V m = Eigen::Map<const V>(m0.data(), d);
    Mat S = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov0.data(), d, d);
    Mat I = Mat::Identity(d, d);
    auto fS = [&](const Mat& X) -> Mat { return Am * X + X * Am.transpose() + epsilon * I; };
    auto push = [&](double t) {
        r.t.push_back(t);
        r.mean.emplace_back(m.data(), m.data() + d);
        Vec c(d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) c[i * d + j] = S(i, j);
        r.cov.push_back(c);
    };
    push(0.0);
    double h = T / n_steps;
    for (int k = 0; k < n_steps; ++k) {
        V k1 = Am * m, k2 = Am * (m + 0.5 * h * k1), k3 = Am * (m + 0.5 * h * k2), k4 = Am * (m + h * k3);
        m += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        Mat s1 = fS(S), s2 = fS(S + 0.5 * h * s1), s3 = fS(S + 0.5 * h * s2), s4 = fS(S + h * s3);
        S += h / 6.0 * (s1 + 2 * s2 + 2 * s3 + s4);
        push(k + 1 == n_steps ? T : (k + 1) * h);
    }
    if (stationary) {
        Eigen::EigenSolver<Mat> es(Am);
        for (int i = 0; i < d; ++i)
            if (!(es.eigenvalues()(i).real() < 0.0)) fail(ErrorKind::Oracle, "A is not Hurwitz; no stationary law");
        // (I (x) A + A (x) I) vec(Sigma) = -eps vec(I)
        Mat K = Mat::Zero(d * d, d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    K(i * d + j, k * d + j) += Am(i, k);
                    K(i * d + j, i * d + k) += Am(j, k);
                }
        V rhs(d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) rhs(i * d + j) = i == j ? -epsilon : 0.0;
        V sol = K.fullPivLu().solve(rhs);
        r.stationary_cov.assign(sol.data(), sol.data() + d * d);
        Mat Sinf(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) Sinf(i, j) = sol(i * d + j);
        // velocity v = (A + (eps/2) Sinf^{-1}) x, E|v|^2 = tr(B Sinf B^T)
        Mat B = Am + 0.5 * epsilon * Sinf.inverse();
        r.epr_rate = 2.0 / epsilon * (B * Sinf * B.transpose()).trace();
    }
    return r;
}

double gaussian_mgf(const Vec& a, const Vec& mu, const Vec& cov) {
    const size_t d = a.size();
    if (mu.size() != d || cov.size() != d * d) fail(ErrorKind::Oracle, "mgf shape mismatch");
    double lin = 0.0, quad = 0.0;
    for (size_t i = 0; i < d; ++i) {
        if (cov[i * d + i] < 0.0) fail(ErrorKind::Oracle, "variances must be nonnegative");
        lin += a[i] * mu[i];
        for (size_t j = 0; j < d; ++j) quad += a[i] * cov[i * d + j] * a[j];
    }
    return std::exp(lin + 0.5 * quad);
}

double gaussian_quadratic_form(const Vec& M, const Vec& mu, const Vec& cov) {
    const size_t d = mu.size();
    if (M.size() != d * d || cov.size() != d * d) fail(ErrorKind::Oracle, "quadratic form shape mismatch");
    double tr = 0.0, q = 0.0;
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) {
            tr += M[i * d + j] * cov[j * d + i];
            q += mu[i] * M[i * d + j] * mu[j];
        }
    return tr + q;
}

IpfpPotentials brute_force_ipfp(const Vec& K, const Vec& w, const Vec& rho0, const Vec& rhoT, double epsilon,
                                double tol, int max_iter) {
    const size_t n = w.size();
    if (K.size() != n * n || rho0.size() != n || rhoT.size() != n) fail(ErrorKind::Oracle, "IPFP shape mismatch");
    for (double k : K)
        if (!(k > 0.0)) fail(ErrorKind::Oracle, "brute-force IPFP needs a strictly positive kernel");
    Vec u(n, 1.0), v(n, 1.0), tmp(n);
    IpfpPotentials out;
    double prev_err = INFINITY;
    for (int it = 1; it <= max_iter; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += K[i * n + j] * v[j] * w[j];
            u[i] = rho0[i] / s;
        }
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t i = 0; i < n; ++i) s += K[i * n + j] * u[i] * w[i];
            v[j] = rhoT[j] / s;
        }
        double err = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += K[i * n + j] * v[j] * w[j];
            err += w[i] * std::abs(u[i] * s - rho0[i]);
        }
        out.iterations = it;
        out.marginal_error = err;
        if (err <= tol) break;
        if (std::abs(prev_err - err) < 1e-15 * std::max(1.0, err)) fail(ErrorKind::Oracle, "brute-force IPFP stalled");
        prev_err = err;
    }
    out.f.resize(n);
    out.g.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.f[i] = -epsilon * std::log(u[i]);
        out.g[i] = -epsilon * std::log(v[i]);
    }
    // gauge: sum_i w_i exp(-f_i/eps) = 1
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) z += w[i] * u[i];
    double c = epsilon * std::log(z);
    for (size_t i = 0; i < n; ++i) {
        out.f[i] += c;
        out.g[i] -= c;
    }
    return out;
}

double harmonic_path(double x0, double T, double t) { return x0 * std::cosh(T - t) / std::cosh(T); }
double harmonic_velocity(double x0, double T, double t) { return -x0 * std::sinh(T - t) / std::cosh(T); }
double harmonic_inf_om(double x0, double T) { return 0.5 * x0 * x0 * std::tanh(T); }
double harmonic_S(double epsilon, double T, double t, double x) {
    return -0.5 * std::tanh(T - t) * x * x - 0.5 * epsilon * std::log(std::cosh(T - t));
}

}  // namespace stl::oracle
