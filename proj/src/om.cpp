#include "stl/om.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "stl/hjheat.hpp"
#include "stl/rng.hpp"

namespace stl {

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double trapezoid_running(const Path& path, const CostSpec& spec, bool reflected) {
    const int n = path.size();
    const double T = path.times.back();
    double s = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        double h = path.times[k + 1] - path.times[k];
        double ta = reflected ? T - path.times[k] : path.times[k];
        double tb = reflected ? T - path.times[k + 1] : path.times[k + 1];
        s += 0.5 * h * (spec.running.value(ta, path.at(k)) + spec.running.value(tb, path.at(k + 1)));
    }
    return s;
}

struct Shot {
    Vec xT, vT;
    double action = 0.0;  // kinetic + running part
};

Shot shoot(const Vec& x0, const Vec& v0, const CostSpec& spec, int n_steps, Path* record) {
    const int d = static_cast<int>(x0.size());
    const double T = spec.horizon, h = T / n_steps;
    Vec x = x0, v = v0;
    double A = 0.0;
    Vec k1x(d), k1v(d), k2x(d), k2v(d), k3x(d), k3v(d), k4x(d), k4v(d), xt(d), vt(d), g(d);
    auto accel = [&](double t, const Vec& xx, Vec& out) { spec.running.gradient(t, xx.data(), out.data()); };
    auto lag = [&](double t, const Vec& xx, const Vec& vv) {
        double k = 0.0;
        for (int i = 0; i < d; ++i) k += vv[i] * vv[i];
        return 0.5 * k + spec.running.value(t, xx.data());
    };
    if (record) {
        record->dim = d;
        record->times.assign(n_steps + 1, 0.0);
        record->states.assign(static_cast<size_t>(n_steps + 1) * d, 0.0);
        std::copy(x.begin(), x.end(), record->states.begin());
    }
    for (int s = 0; s < n_steps; ++s) {
        double t = s * h;
        k1x = v;
        accel(t, x, k1v);
        double a1 = lag(t, x, v);
        for (int i = 0; i < d; ++i) {
            xt[i] = x[i] + 0.5 * h * k1x[i];
            vt[i] = v[i] + 0.5 * h * k1v[i];
        }
        k2x = vt;
        accel(t + 0.5 * h, xt, k2v);
        double a2 = lag(t + 0.5 * h, xt, vt);
        for (int i = 0; i < d; ++i) {
            xt[i] = x[i] + 0.5 * h * k2x[i];
            vt[i] = v[i] + 0.5 * h * k2v[i];
        }
        k3x = vt;
        accel(t + 0.5 * h, xt, k3v);
        double a3 = lag(t + 0.5 * h, xt, vt);
        for (int i = 0; i < d; ++i) {
            xt[i] = x[i] + h * k3x[i];
            vt[i] = v[i] + h * k3v[i];
        }
        k4x = vt;
        accel(t + h, xt, k4v);
        double a4 = lag(t + h, xt, vt);
        for (int i = 0; i < d; ++i) {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        A += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        if (record) {
            record->times[s + 1] = s + 1 == n_steps ? T : (s + 1) * h;
            std::copy(x.begin(), x.end(), record->states.begin() + static_cast<std::ptrdiff_t>((s + 1) * d));
        }
        for (double xi : x)
            if (!std::isfinite(xi)) return Shot{x, v, std::numeric_limits<double>::infinity()};
    }
    return Shot{x, v, A};
}

Vec transversality(const Shot& s, const CostSpec& spec) {
    const int d = static_cast<int>(s.xT.size());
    Vec g(d), r(d);
    spec.terminal.gradient(spec.horizon, s.xT.data(), g.data());
    for (int i = 0; i < d; ++i) r[i] = s.vT[i] + g[i];
    for (double& v : r)
        if (!std::isfinite(v)) v = 1e300;
    return r;
}

}  // namespace

double om_functional(const Path& path, const CostSpec& spec) {
    const int n = path.size(), d = path.dim;
    double kin = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        double h = path.times[k + 1] - path.times[k];
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            double dv = path.at(k + 1)[i] - path.at(k)[i];
            s += dv * dv;
        }
        kin += 0.5 * s / h;
    }
    return kin + trapezoid_running(path, spec, false) + spec.terminal.value(spec.horizon, path.at(n - 1));
}

double lagrangian(const CostSpec& spec, double t, const Vec& x, const Vec& v) {
    return 0.5 * norm(v) * norm(v) + spec.running.value(t, x.data());
}

double hamiltonian(const CostSpec& spec, double t, const Vec& x, const Vec& p) {
    return 0.5 * norm(p) * norm(p) - spec.running.value(t, x.data());
}

ActionReport solve_euler_lagrange(const Vec& x0, const CostSpec& spec, double tol, const ELOptions& opt) {
    const int d = static_cast<int>(x0.size());
    if (d != spec.dim) fail(ErrorKind::Domain, "x0 dimension does not match spec");
    if (spec.running.kind == Potential::Kind::Tabulated || spec.terminal.kind == Potential::Kind::Tabulated)
        fail(ErrorKind::Domain, "shooting needs twice differentiable registry potentials");
    const int N = opt.n_steps;
    ActionReport rep;
    rep.method = "shooting";

    Vec v(d, 0.0);
    if (opt.initial_velocity) {
        v = *opt.initial_velocity;
    } else if (auto target = spec.terminal.argmin_hint(x0.data())) {
        for (int i = 0; i < d; ++i) v[i] = ((*target)[i] - x0[i]) / spec.horizon;
    }
    auto residual = [&](const Vec& vel) { return transversality(shoot(x0, vel, spec, N, nullptr), spec); };

    Vec R = residual(v);
    double rn = norm(R);
    int it = 0;
    for (; it < opt.max_iter && rn > tol; ++it) {
        Eigen::MatrixXd J(d, d);
        for (int j = 0; j < d; ++j) {
            Vec vp = v;
            double h = 1e-6 * (1.0 + std::abs(v[j]));
            vp[j] += h;
            Vec Rp = residual(vp);
            for (int i = 0; i < d; ++i) J(i, j) = (Rp[i] - R[i]) / h;
        }
        Eigen::VectorXd rhs(d);
        for (int i = 0; i < d; ++i) rhs(i) = -R[i];
        Eigen::VectorXd step = J.fullPivLu().solve(rhs);
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-8) {
            Vec vn = v;
            for (int i = 0; i < d; ++i) vn[i] += alpha * step(i);
            Vec Rn = residual(vn);
            double nn = norm(Rn);
            if (nn < rn) {
                v = vn;
                R = Rn;
                rn = nn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        std::ostringstream os;
        os << "newton " << it << ": |R|=" << rn << " alpha=" << alpha;
        rep.trace.push_back(os.str());
        if (!accepted) break;
    }
    if (rn > tol && d == 1) {
        // bracket a sign change of the scalar residual, then bisect
        auto r1 = [&](double vel) { return residual({vel})[0]; };
        double a = v[0], fa = r1(a), b = a, fb = fa;
        double span = 1.0;
        bool found = false;
        for (int k = 0; k < 80 && !found; ++k, span *= 1.6) {
            b = a + span;
            fb = r1(b);
            if (fa * fb <= 0) {
                found = true;
                break;
            }
            b = a - span;
            fb = r1(b);
            if (fa * fb <= 0) found = true;
        }
        if (found) {
            for (int k = 0; k < 200; ++k) {
                double m = 0.5 * (a + b), fm = r1(m);
                if (std::abs(fm) <= tol || std::abs(b - a) < 1e-15 * (1.0 + std::abs(m))) {
                    a = b = m;
                    fa = fm;
                    break;
                }
                if (fa * fm <= 0) {
                    b = m;
                    fb = fm;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            v[0] = 0.5 * (a + b);
            R = residual(v);
            rn = norm(R);
            rep.trace.push_back("bisection fallback: |R|=" + std::to_string(rn));
        }
    }
    rep.iterations = it;
    rep.initial_velocity = v;
    rep.gradient_norm = rn;
    if (!(rn <= tol)) {
        std::ostringstream os;
        os << "Euler-Lagrange shooting did not converge: |R|=" << rn << " after " << it << " Newton steps";
        for (const auto& line : rep.trace) os << "\n  " << line;
        fail(ErrorKind::Convergence, os.str());
    }
    Shot s = shoot(x0, v, spec, N, &rep.path);
    rep.value = s.action + spec.terminal.value(spec.horizon, s.xT.data());
    return rep;
}

Path straight_line_initial(const Vec& x0, const CostSpec& spec, int n_knots) {
    const int d = static_cast<int>(x0.size());
    Vec target = x0;
    if (auto t = spec.terminal.argmin_hint(x0.data())) target = *t;
    Path p;
    p.dim = d;
    p.times.resize(n_knots + 1);
    p.states.resize(static_cast<size_t>(n_knots + 1) * d);
    for (int k = 0; k <= n_knots; ++k) {
        double s = static_cast<double>(k) / n_knots;
        p.times[k] = k == n_knots ? spec.horizon : spec.horizon * s;
        for (int i = 0; i < d; ++i) p.states[static_cast<size_t>(k) * d + i] = (1.0 - s) * x0[i] + s * target[i];
    }
    return p;
}

namespace {

// Discrete action and gradient over the free knots 1..N (each d components).
struct DiscreteAction {
    const CostSpec& spec;
    Vec x0;
    int N, d;
    double h;

    double value(const Vec& y, Vec* grad) const {
        auto X = [&](int k) -> const double* { return k == 0 ? x0.data() : y.data() + static_cast<size_t>(k - 1) * d; };
        double A = 0.0;
        if (grad) grad->assign(y.size(), 0.0);
        Vec gv(d);
        for (int k = 0; k < N; ++k) {
            const double* a = X(k);
            const double* b = X(k + 1);
            for (int i = 0; i < d; ++i) {
                double dv = b[i] - a[i];
                A += 0.5 * dv * dv / h;
                if (grad) {
                    if (k >= 1) (*grad)[static_cast<size_t>(k - 1) * d + i] -= dv / h;
                    (*grad)[static_cast<size_t>(k) * d + i] += dv / h;
                }
            }
        }
        for (int k = 0; k <= N; ++k) {
            double w = (k == 0 || k == N) ? 0.5 * h : h;
            double t = k == N ? spec.horizon : k * h;
            A += w * spec.running.value(t, X(k));
            if (grad && k >= 1) {
                spec.running.gradient(t, X(k), gv.data());
                for (int i = 0; i < d; ++i) (*grad)[static_cast<size_t>(k - 1) * d + i] += w * gv[i];
            }
        }
        A += spec.terminal.value(spec.horizon, X(N));
        if (grad) {
            spec.terminal.gradient(spec.horizon, X(N), gv.data());
            for (int i = 0; i < d; ++i) (*grad)[static_cast<size_t>(N - 1) * d + i] += gv[i];
        }
        return A;
    }

    // interior entries scaled by 1/h (discrete EL residual), last knot raw (transversality)
    double optimality(const Vec& grad) const {
        double m = 0.0;
        for (int k = 1; k <= N; ++k)
            for (int i = 0; i < d; ++i) {
                double g = grad[static_cast<size_t>(k - 1) * d + i];
                m = std::max(m, k < N ? std::abs(g) / h : std::abs(g));
            }
        return m;
    }

    // H0 = P^{-1}, P = kinetic Hessian + h*I (+1 on the free end)
    void precondition(Vec& q) const {
        const int n = N;
        Vec lo(n), di(n), up(n), c(n), col(n);
        for (int k = 0; k < n; ++k) {
            di[k] = (k < n - 1 ? 2.0 / h : 1.0 / h) + (k < n - 1 ? h : 1.0 + 0.5 * h);
            lo[k] = -1.0 / h;
            up[k] = -1.0 / h;
        }
        for (int i = 0; i < d; ++i) {
            for (int k = 0; k < n; ++k) col[k] = q[static_cast<size_t>(k) * d + i];
            // Thomas
            c[0] = up[0] / di[0];
            col[0] /= di[0];
            for (int k = 1; k < n; ++k) {
                double m = di[k] - lo[k] * c[k - 1];
                c[k] = up[k] / m;
                col[k] = (col[k] - lo[k] * col[k - 1]) / m;
            }
            for (int k = n - 2; k >= 0; --k) col[k] -= c[k] * col[k + 1];
            for (int k = 0; k < n; ++k) q[static_cast<size_t>(k) * d + i] = col[k];
        }
    }
};

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct LbfgsResult {
    Vec y;
    double value;
    double optimality;
    int iterations;
    bool converged;
};

LbfgsResult lbfgs(const DiscreteAction& f, Vec y, double tol, int max_iter) {
    const int m = 12;
    std::deque<Vec> S, Y;
    std::deque<double> rho;
    Vec g, gn, q;
    double fx = f.value(y, &g);
    double opt = f.optimality(g);
    int it = 0;
    for (; it < max_iter && opt > tol; ++it) {
        q = g;
        std::vector<double> alpha(S.size());
        for (int j = static_cast<int>(S.size()) - 1; j >= 0; --j) {
            alpha[j] = rho[j] * dot(S[j], q);
            for (size_t i = 0; i < q.size(); ++i) q[i] -= alpha[j] * Y[j][i];
        }
        f.precondition(q);
        for (size_t j = 0; j < S.size(); ++j) {
            double beta = rho[j] * dot(Y[j], q);
            for (size_t i = 0; i < q.size(); ++i) q[i] += S[j][i] * (alpha[j] - beta);
        }
        for (double& v : q) v = -v;
        double slope = dot(g, q);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            rho.clear();
            q = g;
            f.precondition(q);
            for (double& v : q) v = -v;
            slope = dot(g, q);
        }
        double step = 1.0, fn = 0.0;
        Vec yn(y.size());
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < y.size(); ++i) yn[i] = y[i] + step * q[i];
            fn = f.value(yn, &gn);
            if (fn <= fx + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) break;
        Vec s(y.size()), yy(y.size());
        for (size_t i = 0; i < y.size(); ++i) {
            s[i] = yn[i] - y[i];
            yy[i] = gn[i] - g[i];
        }
        double sy = dot(s, yy);
        if (sy > 1e-300) {
            S.push_back(std::move(s));
            Y.push_back(std::move(yy));
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > m) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }
        y.swap(yn);
        g.swap(gn);
        fx = fn;
        opt = f.optimality(g);
    }
    return {y, fx, opt, it, opt <= tol};
}

}  // namespace

ActionReport minimize_om_direct(const Vec& x0, const CostSpec& spec, int n_knots, double tol, const DirectOptions& opt) {
    if (n_knots < 8) fail(ErrorKind::Domain, "n_knots must be at least 8");
    const int d = static_cast<int>(x0.size());
    if (d != spec.dim) fail(ErrorKind::Domain, "x0 dimension does not match spec");
    DiscreteAction f{spec, x0, n_knots, d, spec.horizon / n_knots};

    Path init = opt.initial ? *opt.initial : straight_line_initial(x0, spec, n_knots);
    if (init.size() != n_knots + 1) fail(ErrorKind::Domain, "initial path must have n_knots + 1 points");
    Vec y0(init.states.begin() + d, init.states.end());

    ActionReport best;
    bool have = false;
    CounterRng rng(opt.seed);
    std::vector<std::string> trace;
    for (int s = 0; s < std::max(1, opt.multistart); ++s) {
        Vec y = y0;
        if (s > 0) {
            // random low-frequency bump added to the initial guess
            double u[2];
            rng.uniforms(static_cast<uint64_t>(s), 0, 0, u);
            for (int k = 1; k <= n_knots; ++k) {
                double tau = static_cast<double>(k) / n_knots;
                for (int i = 0; i < d; ++i)
                    y[static_cast<size_t>(k - 1) * d + i] +=
                        opt.perturb * (2.0 * u[0] - 1.0) * std::sin(M_PI * tau * (1.0 + 2.0 * u[1])) * 2.0;
            }
        }
        LbfgsResult r = lbfgs(f, y, tol, opt.max_iter);
        std::ostringstream os;
        os << "start " << s << ": action=" << r.value << " optimality=" << r.optimality << " iters=" << r.iterations;
        trace.push_back(os.str());
        if (!r.converged) continue;
        if (!have || r.value < best.value) {
            have = true;
            best.value = r.value;
            best.gradient_norm = r.optimality;
            best.iterations = r.iterations;
            best.path = init;
            std::copy(r.y.begin(), r.y.end(), best.path.states.begin() + d);
            std::copy(x0.begin(), x0.end(), best.path.states.begin());
        }
    }
    if (!have) {
        std::ostringstream os;
        os << "direct action minimisation did not converge";
        for (const auto& line : trace) os << "\n  " << line;
        fail(ErrorKind::Convergence, os.str());
    }
    best.method = "direct";
    best.trace = trace;
    best.starts = std::max(1, opt.multistart);
    return best;
}

double rate_function(const Path& path, const Vec& x0, const CostSpec& spec, double inf_om) {
    for (int i = 0; i < path.dim; ++i)
        if (std::abs(path.at(0)[i] - x0[i]) > 1e-12) fail(ErrorKind::Domain, "path does not start at x0");
    double r = om_functional(path, spec) - inf_om;
    if (r < -1e-8) {
        std::ostringstream os;
        os << "rate function negative (" << r << "): inf_om is not an infimum";
        fail(ErrorKind::Specification, os.str());
    }
    return std::max(r, 0.0);
}

double fw_om_identity_check(const Path& gamma, const ScalarField& S0, const CostSpec& spec, double inf_om) {
    if (gamma.dim != 1 || !S0.has_time) fail(ErrorKind::Domain, "identity check needs d=1 and a space-time S0");
    ScalarField G = S0;
    for (int k = 0; k < S0.n_t; ++k) {
        Vec g = gradient_1d(S0.slice_ptr(k), S0.nx(), S0.axes[0].dx());
        std::copy(g.begin(), g.end(), G.slice_ptr(k));
    }
    double fw = 0.0;
    for (int k = 0; k + 1 < gamma.size(); ++k) {
        double h = gamma.times[k + 1] - gamma.times[k];
        double tm = 0.5 * (gamma.times[k] + gamma.times[k + 1]);
        double xm = 0.5 * (gamma.x(k) + gamma.x(k + 1));
        double r = (gamma.x(k + 1) - gamma.x(k)) / h - G.interp(tm, xm);
        fw += 0.5 * r * r * h;
    }
    double om = om_functional(gamma, spec) - inf_om;
    return std::abs(fw - om);
}

LdpReport ldp_z_asymptotics(const Vec& x0, const CostSpec& spec_template, const Vec& eps_list, const LdpOptions& opt) {
    if (eps_list.size() < 2) fail(ErrorKind::Domain, "need at least two epsilons");
    for (size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]) || !(eps_list[i] > 0.0)) fail(ErrorKind::Domain, "eps_list must be decreasing and positive");
    LdpReport rep;
    double inf_om = opt.inf_om;
    if (std::isnan(inf_om)) inf_om = solve_euler_lagrange(x0, spec_template, 1e-10).value;
    rep.target = -inf_om;
    for (double e : eps_list) {
        CostSpec s = spec_template;
        s.epsilon = e;
        LdpRow row;
        row.epsilon = e;
        if (opt.method == LdpMethod::grid) {
            ScalarField lp = backward_heat_log(s, opt.grid);
            row.eps_log_z = e * lp.interp_x(0, x0.at(0));
        } else {
            MCEstimate m = feynman_kac(0.0, x0, s, opt.mc_samples, opt.seed, opt.mc_substeps);
            row.eps_log_z = e * m.log_mean;
            double rel = std::exp(m.log_std_error - m.log_mean);
            row.std_error = e * rel;
            if (rel > 0.1) {
                std::ostringstream os;
                os << "Monte Carlo relative error " << rel << " at eps=" << e << "; switch to the grid method";
                rep.advisories.push_back(os.str());
            }
        }
        rep.rows.push_back(row);
    }
    const auto& a = rep.rows[rep.rows.size() - 2];
    const auto& b = rep.rows.back();
    rep.extrapolated = (a.epsilon * b.eps_log_z - b.epsilon * a.eps_log_z) / (a.epsilon - b.epsilon);
    double n = static_cast<double>(rep.rows.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rep.rows) {
        sx += r.epsilon;
        sy += r.eps_log_z;
        sxx += r.epsilon * r.epsilon;
        sxy += r.epsilon * r.eps_log_z;
    }
    rep.fit_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.fit_intercept = (sy - rep.fit_slope * sx) / n;
    return rep;
}

}  // namespace stl
