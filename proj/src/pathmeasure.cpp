#include "stl/pathmeasure.hpp"

#include <algorithm>
#include <cmath>

#include "stl/hjheat.hpp"

namespace stl {

namespace {

double running_integral(const Path& path, const Potential& V, bool reflect, double T) {
    double s = 0.0;
    for (int k = 0; k + 1 < path.size(); ++k) {
        double t0 = path.times[k], t1 = path.times[k + 1];
        double a = V.value(reflect ? T - t0 : t0, path.at(k));
        double b = V.value(reflect ? T - t1 : t1, path.at(k + 1));
        s += 0.5 * (t1 - t0) * (a + b);
    }
    return s;
}

// Spec whose Phi is the original Psi: V reflected in time, f as terminal cost.
CostSpec reflected_spec(const CostSpec& spec) {
    if (!spec.initial) fail(ErrorKind::Specification, "reversed functional needs an initial cost f");
    CostSpec r = spec;
    const double T = spec.horizon;
    if (spec.running.is_static()) {
        r.running = spec.running;
    } else {
        Potential V = spec.running;
        r.running = Potential::custom(
            V.dim, [V, T](double t, const double* x) { return V.value(T - t, x); },
            [V, T](double t, const double* x, double* g) { V.gradient(T - t, x, g); });
    }
    Potential f = *spec.initial;
    r.terminal = Potential::custom(
        f.dim, [f](double, const double* x) { return f.value(0.0, x); },
        [f](double, const double* x, double* g) { f.gradient(0.0, x, g); });
    r.initial.reset();
    return r;
}

}  // namespace

double phi_functional(const Path& path, const CostSpec& spec) {
    path.check();
    return running_integral(path, spec.running, false, spec.horizon) +
           spec.terminal.value(spec.horizon, path.at(path.size() - 1));
}

double psi_functional(const Path& path, const CostSpec& spec) {
    path.check();
    double f_end = spec.initial ? spec.initial->value(0.0, path.at(path.size() - 1)) : 0.0;
    return running_integral(path, spec.running, true, spec.horizon) + f_end;
}

double normalizing_constant(const Vec& x, const CostSpec& spec, const ZMethod& method) {
    if (method.kind == ZMethod::Kind::grid) {
        if (x.size() != 1) fail(ErrorKind::Domain, "grid normalizing constant needs d = 1");
        ScalarField lp = backward_heat_log(spec, method.grid);
        return lp.interp_x(0, x[0]);
    }
    MCEstimate e = feynman_kac(0.0, x, spec, method.n_samples, method.seed, method.substeps);
    return e.log_mean;
}

double normalizing_constant_reversed(const Vec& x, const CostSpec& spec, const ZMethod& method) {
    if (!spec.initial) fail(ErrorKind::Specification, "reversed normalizing constant needs an initial cost f");
    if (method.kind == ZMethod::Kind::grid) {
        if (x.size() != 1) fail(ErrorKind::Domain, "grid normalizing constant needs d = 1");
        ScalarField lp = forward_heat_log(spec, method.grid);
        return lp.interp_x(lp.n_t - 1, x[0]);
    }
    MCEstimate e = feynman_kac(0.0, x, reflected_spec(spec), method.n_samples, method.seed, method.substeps);
    return e.log_mean;
}

double log_rn_nu_vs_mu(const Path& path, const CostSpec& spec, double logZ) {
    return -phi_functional(path, spec) / spec.epsilon - logZ;
}

double log_rn_forward_vs_reversed(const Path& path, const CostSpec& spec, double logZ_phi, double logZ_psi) {
    if (!spec.initial) fail(ErrorKind::Specification, "forward/reversed density needs both f and g");
    path.check();
    const double* end = path.at(path.size() - 1);
    double integral = 0.0;
    if (!spec.running.is_static())
        integral = running_integral(path, spec.running, true, spec.horizon) -
                   running_integral(path, spec.running, false, spec.horizon);
    double bracket = integral + spec.initial->value(0.0, end) - spec.terminal.value(spec.horizon, end);
    return logZ_psi - logZ_phi + bracket / spec.epsilon;
}

ScalarField born_marginal(double t, const CostSpec& spec, const SpaceTimeGrid& grid) {
    if (!spec.initial) fail(ErrorKind::Specification, "Born marginal needs an initial cost f");
    if (t < 0.0 || t > spec.horizon) fail(ErrorKind::Domain, "t must lie in [0,T]");
    ScalarField lphi = backward_heat_log(spec, grid);
    ScalarField lpsi = forward_heat_log(spec, grid);
    const Axis& ax = grid.x();
    ScalarField out = ScalarField::space(FieldLabel::rho, {ax});
    Vec lg(ax.n);
    for (int i = 0; i < ax.n; ++i) lg[i] = lphi.interp(t, ax.x(i)) + lpsi.interp(t, ax.x(i));
    double mx = *std::max_element(lg.begin(), lg.end());
    for (int i = 0; i < ax.n; ++i) out.values[i] = std::exp(lg[i] - mx);
    double mass = trapezoid(out.values.data(), ax.n, ax.dx());
    if (!(mass > 1e-280) || !std::isfinite(mass))
        fail(ErrorKind::Domain, "Born marginal has negligible mass on the grid; widen the domain");
    for (double& v : out.values) v /= mass;
    return out;
}

KlReport kl_divergence(const KlInputs& in, const CostSpec& spec) {
    if (!in.ensemble || !in.trial_drift) fail(ErrorKind::Specification, "KL estimate needs an ensemble and its drift");
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    const PathEnsemble& ens = *in.ensemble;
    const int d = ens.dim, nt = ens.n_times();
    const double eps = spec.epsilon;
    const bool density_mode = static_cast<bool>(in.trial_init_logdensity);
    if (density_mode && !spec.initial)
        fail(ErrorKind::Specification, "trial and target initial laws differ but the target has no initial cost f");
    if (density_mode && d != 1) fail(ErrorKind::Domain, "density-mode KL is implemented for d = 1");

    double log_norm = in.logZ;
    const ScalarField* lz = in.logZ_field ? &*in.logZ_field : nullptr;
    if (density_mode) {
        if (!lz) fail(ErrorKind::Specification, "density-mode KL needs log Z over start points");
        // log of  int e^{-f/eps} phi(0,x) dx  on the grid
        const Axis& ax = lz->axes[0];
        Vec w(ax.n);
        for (int i = 0; i < ax.n; ++i) w[i] = -spec.f(ax.x(i)) / eps + lz->interp_x(0, ax.x(i));
        double mx = *std::max_element(w.begin(), w.end());
        for (double& v : w) v = std::exp(v - mx);
        log_norm = mx + std::log(trapezoid(w.data(), ax.n, ax.dx()));
    }

    Vec main(ens.n_paths), cross(ens.n_paths);
    Vec b(d), bt(d);
    for (int p = 0; p < ens.n_paths; ++p) {
        double kin = 0.0, gap = 0.0;
        for (int k = 0; k + 1 < nt; ++k) {
            double dt = ens.times[k + 1] - ens.times[k];
            in.trial_drift->eval(ens.times[k], ens.at(p, k), b.data());
            double bb = 0.0;
            for (int i = 0; i < d; ++i) bb += b[i] * b[i];
            kin += 0.5 * bb * dt;
            if (in.target_drift) {
                in.target_drift->eval(ens.times[k], ens.at(p, k), bt.data());
                double g = 0.0;
                for (int i = 0; i < d; ++i) g += (b[i] - bt[i]) * (b[i] - bt[i]);
                gap += 0.5 * g * dt;
            }
        }
        Path path = ens.path(p);
        double val = (kin + phi_functional(path, spec)) / eps;
        double x0 = ens.at(p, 0)[0];
        double init_term = 0.0;
        if (density_mode) {
            double lr = in.trial_init_logdensity(x0);
            init_term = lr + spec.f(x0) / eps;
            // cross-check initial term: log rho~0 - log nu0
            double lnu0 = -spec.f(x0) / eps + lz->interp_x(0, x0) - log_norm;
            cross[p] = lr - lnu0 + gap / eps;
        } else {
            cross[p] = gap / eps;
        }
        main[p] = val + init_term;
    }
    KlReport rep;
    rep.method = density_mode ? "density" : "point";
    MeanSE m = mean_se(main);
    rep.estimate.mean = m.mean + log_norm;
    rep.estimate.std_error = m.se;
    rep.estimate.n_samples = ens.n_paths;
    rep.estimate.seed = ens.master_seed;
    if (in.target_drift) {
        MeanSE c = mean_se(cross);
        MCEstimate ce;
        ce.mean = c.mean;
        ce.std_error = c.se;
        ce.n_samples = ens.n_paths;
        ce.seed = ens.master_seed;
        rep.cross_check = ce;
    }
    return rep;
}

}  // namespace stl
