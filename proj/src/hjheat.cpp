#include "stl/hjheat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stl/om.hpp"
#include "stl/parallel.hpp"
#include "stl/rng.hpp"
#include "tridiag.hpp"

namespace stl {

namespace {

using detail::Tridiag;


// Fourth-order compact (Numerov) discretisation of  M u_t = L u  with
// L = (eps/2) D2 - M diag(q),  M = tridiag(1,10,1)/12, even reflection at the ends.
// Returns M + sign*(dt/2)*L.
Tridiag compact_system(double eps, double dx, const Vec& q, double sign_half_dt) {
    const size_t n = q.size();
    Tridiag t;
    t.lo.assign(n, 0.0);
    t.di.assign(n, 0.0);
    t.up.assign(n, 0.0);
    const double d = 0.5 * eps / (dx * dx);
    const double s = sign_half_dt;
    for (size_t i = 0; i < n; ++i) {
        double ml = 1.0 / 12, mu = 1.0 / 12, dl = d, du = d;
        if (i == 0) {
            ml = 0.0;
            mu = 2.0 / 12;
            dl = 0.0;
            du = 2.0 * d;
        } else if (i == n - 1) {
            ml = 2.0 / 12;
            mu = 0.0;
            dl = 2.0 * d;
            du = 0.0;
        }
        double Ld = -2.0 * d - (10.0 / 12) * q[i];
        t.di[i] = 10.0 / 12 + s * Ld;
        if (i > 0) t.lo[i] = ml + s * (dl - ml * q[i - 1]);
        if (i + 1 < n) t.up[i] = mu + s * (du - mu * q[i + 1]);
    }
    return t;
}

Vec nodes(const Axis& ax) {
    Vec x(ax.n);
    for (int i = 0; i < ax.n; ++i) x[i] = ax.x(i);
    return x;
}

Vec potential_over_eps(const Potential& V, double t, const Vec& x, double eps) {
    Vec q(x.size());
    for (size_t i = 0; i < x.size(); ++i) q[i] = V.value(t, x[i]) / eps;
    return q;
}

void require_line(const CostSpec& spec, const SpaceTimeGrid& grid) {
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    if (spec.dim != 1 || grid.dim() != 1) fail(ErrorKind::Domain, "grid heat solvers are restricted to d = 1");
    if (grid.x().n < 8 || grid.n_t < 2) fail(ErrorKind::Domain, "grid too small");
    if (std::abs(grid.T - spec.horizon) > 1e-12 * std::max(1.0, spec.horizon))
        fail(ErrorKind::Specification, "grid horizon must equal spec horizon");
}

// Shared marcher. data(T) given in log form; forward==true marches 0 -> T.
ScalarField march_log(const CostSpec& spec, const SpaceTimeGrid& grid, const Vec& log_start, bool forward,
                      bool log_mode, FieldLabel label) {
    const Axis& ax = grid.x();
    const int n = ax.n, nt = grid.n_t;
    const double eps = spec.epsilon, dt = grid.dt(), dx = ax.dx();
    const Vec x = nodes(ax);
    ScalarField out = ScalarField::space_time(label, ax, nt, grid.T);

    double scale = 0.0;
    if (log_mode) scale = *std::max_element(log_start.begin(), log_start.end());
    Vec u(n), rhs(n);
    for (int i = 0; i < n; ++i) u[i] = std::exp(log_start[i] - scale);

    const int k0 = forward ? 0 : nt - 1;
    const int dir = forward ? 1 : -1;
    std::copy(log_start.begin(), log_start.end(), out.slice_ptr(k0));

    const bool stat = spec.running.is_static();
    Vec q_static;
    Tridiag A, B;
    if (stat) {
        q_static = potential_over_eps(spec.running, 0.0, x, eps);
        A = compact_system(eps, dx, q_static, -0.5 * dt);
        B = compact_system(eps, dx, q_static, 0.5 * dt);
        A.factor();
    }
    for (int step = 1; step < nt; ++step) {
        int k_new = k0 + dir * step, k_old = k_new - dir;
        if (!stat) {
            Vec q_new = potential_over_eps(spec.running, grid.t(k_new), x, eps);
            Vec q_old = potential_over_eps(spec.running, grid.t(k_old), x, eps);
            A = compact_system(eps, dx, q_new, -0.5 * dt);
            B = compact_system(eps, dx, q_old, 0.5 * dt);
            A.factor();
        }
        B.apply(u.data(), rhs.data());
        A.solve(rhs.data());
        u.swap(rhs);
        double mx = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(u[i] > 0.0) || !std::isfinite(u[i])) {
                std::ostringstream os;
                os << "heat solver lost positivity at t=" << grid.t(k_new) << ", x=" << x[i]
                   << "; reduce dt or widen the log-domain range";
                fail(ErrorKind::Stability, os.str());
            }
            mx = std::max(mx, u[i]);
        }
        if (log_mode) {
            for (int i = 0; i < n; ++i) u[i] /= mx;
            scale += std::log(mx);
        }
        double* slice = out.slice_ptr(k_new);
        for (int i = 0; i < n; ++i) slice[i] = std::log(u[i]) + scale;
    }
    return out;
}

}  // namespace

double heat_kernel(double t, const Vec& x, double epsilon) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    if (!(epsilon > 0.0)) fail(ErrorKind::Domain, "heat kernel needs epsilon > 0");
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    double var = epsilon * t;
    double d = static_cast<double>(x.size());
    return std::pow(2.0 * std::numbers::pi * var, -0.5 * d) * std::exp(-r2 / (2.0 * var));
}

bool needs_log_domain(const CostSpec& spec, const SpaceTimeGrid& grid, bool forward) {
    const Axis& ax = grid.x();
    Vec times = {0.0};
    if (!spec.running.is_static()) times = spec.running.scale_times;
    double gmax = 0.0, vmax = 0.0;
    for (int i = 0; i < ax.n; ++i) {
        double xi = ax.x(i);
        double data = forward ? spec.f(xi) : spec.g(xi);
        gmax = std::max(gmax, std::abs(data));
        for (double t : times) vmax = std::max(vmax, std::abs(spec.running.value(t, xi)));
    }
    return gmax / spec.epsilon > 700.0 || vmax * spec.horizon / spec.epsilon > 700.0;
}

ScalarField backward_heat_log(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    require_line(spec, grid);
    const Axis& ax = grid.x();
    Vec start(ax.n);
    for (int i = 0; i < ax.n; ++i) start[i] = -spec.g(ax.x(i)) / spec.epsilon;
    bool log_mode = opt.log_domain.value_or(needs_log_domain(spec, grid, false));
    return march_log(spec, grid, start, false, log_mode, FieldLabel::log_phi);
}

ScalarField forward_heat_log(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    require_line(spec, grid);
    if (!spec.initial) fail(ErrorKind::Specification, "forward heat equation needs an initial cost f");
    const Axis& ax = grid.x();
    Vec start(ax.n);
    for (int i = 0; i < ax.n; ++i) start[i] = -spec.f(ax.x(i)) / spec.epsilon;
    bool log_mode = opt.log_domain.value_or(needs_log_domain(spec, grid, true));
    return march_log(spec, grid, start, true, log_mode, FieldLabel::log_psi);
}

namespace {

ScalarField exp_field(ScalarField lf, FieldLabel label) {
    lf.label = label;
    for (double& v : lf.values) {
        v = std::exp(v);
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorKind::Stability,
                 "heat solution not representable in double precision; use the log-domain HJ route");
    }
    return lf;
}
}  // namespace

ScalarField solve_backward_heat(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    return exp_field(backward_heat_log(spec, grid, opt), FieldLabel::phi);
}

ScalarField solve_forward_heat(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    return exp_field(forward_heat_log(spec, grid, opt), FieldLabel::psi);
}

void propagate_backward(const CostSpec& spec, const SpaceTimeGrid& grid, std::vector<double>& data, int n_cols) {
    require_line(spec, grid);
    const Axis& ax = grid.x();
    const int n = ax.n, nt = grid.n_t;
    const double eps = spec.epsilon, dt = grid.dt(), dx = ax.dx();
    if (data.size() != static_cast<size_t>(n) * n_cols) fail(ErrorKind::Domain, "propagation data shape mismatch");
    const Vec x = nodes(ax);
    Vec rhs(n);
    for (int step = nt - 1; step >= 1; --step) {
        Vec q_new = potential_over_eps(spec.running, grid.t(step - 1), x, eps);
        Vec q_old = spec.running.is_static() ? q_new : potential_over_eps(spec.running, grid.t(step), x, eps);
        Tridiag A = compact_system(eps, dx, q_new, -0.5 * dt);
        Tridiag B = compact_system(eps, dx, q_old, 0.5 * dt);
        A.factor();
        parallel_for(n_cols, [&](long b, long e) {
            Vec r(n);
            for (long c = b; c < e; ++c) {
                double* col = data.data() + static_cast<size_t>(c) * n;
                B.apply(col, r.data());
                A.solve(r.data());
                std::copy(r.begin(), r.end(), col);
            }
        });
    }
}

MCEstimate feynman_kac(double t, const Vec& x, const CostSpec& spec, long n_samples, unsigned long long seed,
                       int n_substeps) {
    if (n_samples < 1) fail(ErrorKind::Domain, "n_samples must be at least 1");
    if (n_substeps < 1) fail(ErrorKind::Domain, "n_substeps must be at least 1");
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    if (t > spec.horizon || t < 0.0) fail(ErrorKind::Domain, "t must lie in [0,T]");
    const int d = static_cast<int>(x.size());
    const double eps = spec.epsilon;
    const double h = (spec.horizon - t) / n_substeps;
    const double sq = std::sqrt(eps * h);
    CounterRng rng(seed);
    Vec expo(n_samples);
    parallel_for(n_samples, [&](long b, long e) {
        Vec X(d), z(d);
        for (long s = b; s < e; ++s) {
            X = x;
            double integral = 0.0;
            if (h > 0.0) {
                integral += 0.5 * spec.running.value(t, X.data());
                for (int j = 1; j <= n_substeps; ++j) {
                    rng.normals(static_cast<uint64_t>(s), static_cast<uint64_t>(j - 1), z.data(), d);
                    for (int c = 0; c < d; ++c) X[c] += sq * z[c];
                    double tj = j == n_substeps ? spec.horizon : t + j * h;
                    integral += (j == n_substeps ? 0.5 : 1.0) * spec.running.value(tj, X.data());
                }
                integral *= h;
            }
            expo[s] = -(integral + spec.terminal.value(spec.horizon, X.data())) / eps;
        }
    });
    MCEstimate est;
    est.n_samples = n_samples;
    est.seed = seed;
    double emax = *std::max_element(expo.begin(), expo.end());
    double emin = *std::min_element(expo.begin(), expo.end());
    Vec w(n_samples);
    for (long s = 0; s < n_samples; ++s) w[s] = std::exp(expo[s] - emax);
    MeanSE ms = mean_se(w);
    est.log_mean = emax + std::log(ms.mean);
    est.log_std_error = ms.se > 0.0 ? emax + std::log(ms.se) : -std::numeric_limits<double>::infinity();
    if (std::max(std::abs(emax), std::abs(emin)) > 700.0) {
        est.log_domain = true;
        est.mean = std::exp(est.log_mean);
        est.std_error = std::exp(est.log_std_error);
    } else {
        Vec raw(n_samples);
        for (long s = 0; s < n_samples; ++s) raw[s] = std::exp(expo[s]);
        MeanSE r = mean_se(raw);
        est.mean = r.mean;
        est.std_error = r.se;
    }
    return est;
}

ScalarField solve_hj(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    ScalarField S = backward_heat_log(spec, grid, opt);
    S.label = FieldLabel::S;
    for (double& v : S.values) v *= spec.epsilon;
    return S;
}

ScalarField solve_hj_reversed(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt) {
    ScalarField S = forward_heat_log(spec, grid, opt);
    S.label = FieldLabel::S_rev;
    for (double& v : S.values) v *= spec.epsilon;
    return S;
}

ScalarField hj_residual(const ScalarField& S, const CostSpec& spec, bool reversed) {
    if (!S.has_time || S.dim() != 1) fail(ErrorKind::Domain, "hj_residual needs a d=1 space-time field");
    ScalarField R = S;
    R.label = FieldLabel::other;
    std::fill(R.values.begin(), R.values.end(), 0.0);
    const int n = S.nx(), nt = S.n_t;
    const double dx = S.axes[0].dx(), dt = S.dt(), eps = spec.epsilon;
    for (int k = 1; k < nt - 1; ++k) {
        double t = S.t(k);
        for (int i = 1; i < n - 1; ++i) {
            double St = (S.at(k + 1, i) - S.at(k - 1, i)) / (2.0 * dt);
            double Sx = (S.at(k, i + 1) - S.at(k, i - 1)) / (2.0 * dx);
            double Sxx = (S.at(k, i + 1) - 2.0 * S.at(k, i) + S.at(k, i - 1)) / (dx * dx);
            double x = S.axes[0].x(i);
            R.at(k, i) = (reversed ? -St : St) + 0.5 * Sx * Sx + 0.5 * eps * Sxx - spec.running.value(t, x);
        }
    }
    return R;
}

ScalarField nh_residual(const ScalarField& S, const CostSpec& spec) {
    if (!S.has_time || S.dim() != 1) fail(ErrorKind::Domain, "nh_residual needs a d=1 space-time field");
    const int n = S.nx(), nt = S.n_t;
    const double dx = S.axes[0].dx(), dt = S.dt(), eps = spec.epsilon;
    ScalarField b = S;
    for (int k = 0; k < nt; ++k) {
        Vec g = gradient_1d(S.slice_ptr(k), n, dx);
        std::copy(g.begin(), g.end(), b.slice_ptr(k));
    }
    ScalarField R = S;
    R.label = FieldLabel::other;
    std::fill(R.values.begin(), R.values.end(), 0.0);
    for (int k = 1; k < nt - 1; ++k) {
        double t = S.t(k);
        for (int i = 2; i < n - 2; ++i) {
            double bt = (b.at(k + 1, i) - b.at(k - 1, i)) / (2.0 * dt);
            double bx = (b.at(k, i + 1) - b.at(k, i - 1)) / (2.0 * dx);
            double bxx = (b.at(k, i + 1) - 2.0 * b.at(k, i) + b.at(k, i - 1)) / (dx * dx);
            double x = S.axes[0].x(i);
            R.at(k, i) = bt + b.at(k, i) * bx + 0.5 * eps * bxx - spec.running.gradient(t, x);
        }
    }
    return R;
}

double max_abs_interior(const ScalarField& f, double half_width, int ring) {
    const Axis& ax = f.axes[0];
    double c = 0.5 * (ax.min + ax.max);
    int k_lo = f.has_time ? ring : 0, k_hi = f.has_time ? f.n_t - 1 - ring : 0;
    double m = 0.0;
    for (int k = k_lo; k <= k_hi; ++k)
        for (int i = ring; i < ax.n - ring; ++i) {
            if (half_width > 0.0 && std::abs(ax.x(i) - c) > half_width + 1e-12) continue;
            m = std::max(m, std::abs(f.at(k, i)));
        }
    return m;
}

double default_window(const CostSpec& spec, const SpaceTimeGrid& grid) {
    const Axis& ax = grid.x();
    double half = 0.5 * (ax.max - ax.min);
    double w = half - 4.0 * std::sqrt(spec.epsilon * spec.horizon);
    return w > 0.0 ? w : 0.5 * half;
}

namespace {

CostSpec shift_spec(const CostSpec& spec, double t0) {
    CostSpec s = spec;
    s.horizon = spec.horizon - t0;
    if (!spec.running.is_static()) {
        Vec ts = spec.running.scale_times;
        for (double& v : ts) v -= t0;
        s.running = spec.running.with_time_scale(ts, spec.running.scale_values);
    }
    return s;
}

}  // namespace

ClassicalSolution solve_hj_classical(const CostSpec& spec, const SpaceTimeGrid& grid, double x0,
                                     const ClassicalOptions& opt) {
    if (spec.dim != 1) fail(ErrorKind::Domain, "classical HJ lattice solver is restricted to d = 1");
    if (spec.running.kind == Potential::Kind::Tabulated || spec.terminal.kind == Potential::Kind::Tabulated)
        fail(ErrorKind::Domain, "classical HJ solver needs registry potentials");
    Axis lx{opt.x_lo, opt.x_hi, opt.n_x};
    if (!(opt.x_hi > opt.x_lo)) lx = Axis{grid.x().min, grid.x().max, opt.n_x};
    ClassicalSolution sol;
    sol.S0 = ScalarField::space_time(FieldLabel::S0, lx, opt.n_t, spec.horizon);
    const double T = spec.horizon;
    std::vector<std::string> failures;
    parallel_for(static_cast<long>(opt.n_t) * lx.n, [&](long b, long e) {
        for (long idx = b; idx < e; ++idx) {
            int k = static_cast<int>(idx / lx.n), i = static_cast<int>(idx % lx.n);
            double t = sol.S0.t(k), x = lx.x(i);
            if (k == opt.n_t - 1) {
                sol.S0.at(k, i) = -spec.g(x);
                continue;
            }
            CostSpec sh = shift_spec(spec, t);
            ELOptions eo;
            eo.n_steps = std::max(40, static_cast<int>(std::lround(opt.el_steps * (T - t) / T)));
            ActionReport rep = solve_euler_lagrange({x}, sh, opt.tol, eo);
            sol.S0.at(k, i) = -rep.value;
        }
    });
    ELOptions eo;
    eo.n_steps = opt.el_steps;
    sol.inf_om_at_x0 = solve_euler_lagrange({x0}, spec, opt.tol, eo).value;
    return sol;
}

SmallNoiseReport hj_smallnoise_convergence(const CostSpec& spec, const SpaceTimeGrid& grid, const Vec& eps_list,
                                           double window, const ClassicalOptions& opt) {
    if (eps_list.empty()) fail(ErrorKind::Domain, "eps_list is empty");
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) fail(ErrorKind::Domain, "eps_list must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) fail(ErrorKind::Domain, "eps_list must be decreasing");
    }
    ClassicalOptions o = opt;
    if (!(o.x_hi > o.x_lo)) {
        double c = 0.5 * (grid.x().min + grid.x().max);
        o.x_lo = c - window;
        o.x_hi = c + window;
    }
    ClassicalSolution cl = solve_hj_classical(spec, grid, 0.5 * (o.x_lo + o.x_hi), o);
    SmallNoiseReport rep;
    for (double e : eps_list) {
        CostSpec s = spec;
        s.epsilon = e;
        ScalarField S = solve_hj(s, grid);
        double gap = 0.0;
        for (int k = 0; k < cl.S0.n_t; ++k)
            for (int i = 0; i < cl.S0.nx(); ++i) {
                double x = cl.S0.axes[0].x(i);
                gap = std::max(gap, std::abs(S.interp(cl.S0.t(k), x) - cl.S0.at(k, i)));
            }
        rep.rows.push_back({e, gap});
    }
    rep.monotone_decrease = true;
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].gap < rep.rows[i - 1].gap)) rep.monotone_decrease = false;
    return rep;
}

}  // namespace stl
