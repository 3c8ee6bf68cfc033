#include "stl/entropy.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "stl/parallel.hpp"
#include "tridiag.hpp"

namespace stl {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kRhoFloor = 1e-300;
constexpr double kLogFloor = -690.7755278982137;

// Bernoulli function z / (e^z - 1)
double bern(double z) {
    if (std::abs(z) < 1e-10) return 1.0 - 0.5 * z;
    return z / std::expm1(z);
}

// FV generator for the Fokker-Planck flux with weights w: rows of  d rho/dt = L rho.
detail::Tridiag fpe_system(const DriftSpec& drift, double t, const Axis& ax, double D, double half_dt_sign) {
    const int n = ax.n;
    const double dx = ax.dx();
    detail::Tridiag m;
    m.lo.assign(n, 0.0);
    m.di.assign(n, 0.0);
    m.up.assign(n, 0.0);
    Vec bp(n - 1), bm(n - 1);  // B(z), B(-z) per face
    for (int i = 0; i + 1 < n; ++i) {
        double xm = ax.x(i) + 0.5 * dx, b;
        drift.eval(t, &xm, &b);
        double z = b * dx / D;
        bp[i] = bern(z);
        bm[i] = bern(-z);
    }
    const double c = D / dx;
    for (int i = 0; i < n; ++i) {
        double w = (i == 0 || i == n - 1) ? 0.5 * dx : dx;
        double di = 0.0, lo = 0.0, up = 0.0;
        if (i + 1 < n) {  // outgoing face i+1/2
            di -= c * bm[i];
            up += c * bp[i];
        }
        if (i > 0) {  // incoming face i-1/2
            lo += c * bm[i - 1];
            di -= c * bp[i - 1];
        }
        m.di[i] = 1.0 + half_dt_sign * di / w;
        m.lo[i] = half_dt_sign * lo / w;
        m.up[i] = half_dt_sign * up / w;
    }
    return m;
}

double fv_mass(const double* r, const Axis& ax) { return trapezoid(r, ax.n, ax.dx()); }

}  // namespace

DensityEvolution evolve_fpe(const ScalarField& init_density, const DriftSpec& drift, const CostSpec& spec,
                            const SpaceTimeGrid& grid) {
    if (grid.dim() != 1 || drift.dim != 1) fail(ErrorKind::Domain, "grid Fokker-Planck route is d = 1 only");
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    const Axis& ax = grid.x();
    if (init_density.dim() != 1 || init_density.nx() != ax.n ||
        std::abs(init_density.axes[0].min - ax.min) > 1e-12 || std::abs(init_density.axes[0].max - ax.max) > 1e-12)
        fail(ErrorKind::Specification, "initial density must live on the grid axis");
    const int n = ax.n, nt = grid.n_t;
    const double D = 0.5 * spec.epsilon, dt = grid.dt();

    ScalarField rho = ScalarField::space_time(FieldLabel::rho, ax, nt, grid.T);
    Vec u(init_density.values.begin(), init_density.values.begin() + n), rhs(n);
    for (double v : u)
        if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::Specification, "initial density must be nonnegative");
    double m0 = fv_mass(u.data(), ax);
    if (!(m0 > 0.0)) fail(ErrorKind::Specification, "initial density has zero mass");
    for (double& v : u) v /= m0;
    std::copy(u.begin(), u.end(), rho.slice_ptr(0));

    const bool stat = drift.kind == DriftSpec::Kind::zero || drift.kind == DriftSpec::Kind::linear ||
                      (drift.kind == DriftSpec::Kind::registry && drift.potential.is_static()) ||
                      (drift.kind == DriftSpec::Kind::gradient_of && !drift.grad->has_time);
    detail::Tridiag Am, Bm;
    if (stat) {
        Am = fpe_system(drift, 0.0, ax, D, -0.5 * dt);
        Bm = fpe_system(drift, 0.0, ax, D, 0.5 * dt);
        Am.factor();
    }
    double drift_max = 0.0;
    for (int k = 1; k < nt; ++k) {
        if (!stat) {
            Am = fpe_system(drift, grid.t(k), ax, D, -0.5 * dt);
            Bm = fpe_system(drift, grid.t(k - 1), ax, D, 0.5 * dt);
            Am.factor();
        }
        Bm.apply(u.data(), rhs.data());
        Am.solve(rhs.data());
        u.swap(rhs);
        double mx = *std::max_element(u.begin(), u.end());
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(u[i]) || u[i] < -1e-10 * mx) {
                std::ostringstream os;
                os << "Fokker-Planck solution lost positivity at t=" << grid.t(k) << ", x=" << ax.x(i)
                   << "; reduce dt or dx";
                fail(ErrorKind::Stability, os.str());
            }
            u[i] = std::max(u[i], 0.0);
        }
        double m = fv_mass(u.data(), ax);
        drift_max = std::max(drift_max, std::abs(m - 1.0));
        for (double& v : u) v /= m;
        std::copy(u.begin(), u.end(), rho.slice_ptr(k));
    }
    DensityEvolution out = DensityEvolution::from_grid(rho);
    out.max_mass_drift = drift_max;
    return out;
}

DensityEvolution evolve_gaussian(const DriftSpec& drift, const Vec& mean0, const Vec& cov0, const CostSpec& spec,
                                 int n_t) {
    if (drift.kind != DriftSpec::Kind::linear && drift.kind != DriftSpec::Kind::zero)
        fail(ErrorKind::Specification, "analytic density route needs a linear drift");
    const int d = drift.dim;
    if (static_cast<int>(mean0.size()) != d || static_cast<int>(cov0.size()) != d * d)
        fail(ErrorKind::Specification, "initial moments do not match the drift dimension");
    if (n_t < 2) fail(ErrorKind::Domain, "need at least two time slices");
    const double eps = spec.epsilon, T = spec.horizon, h = T / (n_t - 1);
    Vec Av = drift.kind == DriftSpec::Kind::linear ? drift.A : Vec(static_cast<size_t>(d) * d, 0.0);
    Vec cv = drift.offset.empty() ? Vec(d, 0.0) : drift.offset;
    Eigen::Map<const RowMat> A(Av.data(), d, d);
    Eigen::Map<const Eigen::VectorXd> c(cv.data(), d);

    // exact one-step maps by block exponentials (Van Loan)
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    C.topLeftCorner(d, d) = -A * h;
    C.topRightCorner(d, d) = eps * h * Eigen::MatrixXd::Identity(d, d);
    C.bottomRightCorner(d, d) = A.transpose() * h;
    Eigen::MatrixXd E = C.exp();
    Eigen::MatrixXd Phi = E.bottomRightCorner(d, d).transpose();
    Eigen::MatrixXd Q = Phi * E.topRightCorner(d, d);
    Eigen::MatrixXd Cm = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    Cm.topLeftCorner(d, d) = A * h;
    Cm.topRightCorner(d, d) = h * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd Psi = Cm.exp().topRightCorner(d, d);

    std::vector<Vec> means, covs;
    Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(mean0.data(), d);
    Eigen::MatrixXd S = Eigen::Map<const RowMat>(cov0.data(), d, d);
    for (int k = 0; k < n_t; ++k) {
        means.emplace_back(m.data(), m.data() + d);
        Vec sv(static_cast<size_t>(d) * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) sv[i * d + j] = 0.5 * (S(i, j) + S(j, i));
        covs.push_back(sv);
        m = Phi * m + Psi * c;
        S = Phi * S * Phi.transpose() + Q;
    }
    return DensityEvolution::gaussian(d, T, std::move(means), std::move(covs), Av, cv, eps);
}

CurrentVelocity current_and_velocity(const ScalarField& rho_slice, const DriftSpec& drift, const CostSpec& spec,
                                     double t) {
    if (rho_slice.dim() != 1) fail(ErrorKind::Domain, "current_and_velocity is d = 1 only");
    const Axis& ax = rho_slice.axes[0];
    const int n = ax.n;
    const double* r = rho_slice.values.data();
    Vec lr(n);
    for (int i = 0; i < n; ++i) {
        if (!(r[i] > 0.0)) fail(ErrorKind::Domain, "density must be positive for the velocity field");
        lr[i] = std::log(r[i]);
    }
    Vec dr = gradient_1d(r, n, ax.dx());
    Vec dl = gradient_1d(lr.data(), n, ax.dx());
    CurrentVelocity cv{ScalarField::space(FieldLabel::other, {ax}), ScalarField::space(FieldLabel::other, {ax})};
    for (int i = 0; i < n; ++i) {
        double x = ax.x(i), b;
        drift.eval(t, &x, &b);
        cv.j.values[i] = b * r[i] - 0.5 * spec.epsilon * dr[i];
        cv.v.values[i] = b - 0.5 * spec.epsilon * dl[i];
    }
    return cv;
}

void velocity_at(const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec, double t, const double* x,
                 double* out) {
    const int d = drift.dim;
    double gl[8];
    drift.eval(t, x, out);
    rho.grad_log(t, x, gl);
    for (int i = 0; i < d; ++i) out[i] -= 0.5 * spec.epsilon * gl[i];
}

EntropyLedger entropy_ledger(const PathEnsemble& ens, const DensityEvolution& rho, const DriftSpec& drift,
                             const CostSpec& spec, SysConvention conv) {
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    if (ens.dim != drift.dim || ens.dim != rho.dim()) fail(ErrorKind::Specification, "dimension mismatch in ledger");
    if (ens.dim > 8) fail(ErrorKind::Domain, "ledger supports d <= 8");
    const int d = ens.dim, nt = ens.n_times();
    const double T = ens.times.back(), eps = spec.epsilon;
    if (std::abs(T - rho.horizon()) > 1e-9 * std::max(1.0, T))
        fail(ErrorKind::Specification, "density horizon differs from the ensemble horizon");

    Vec sys(ens.n_paths), med(ens.n_paths);
    std::vector<char> bad(ens.n_paths, 0);
    parallel_for(ens.n_paths, [&](long b, long e) {
        double xm[8], bv[8];
        for (long p = b; p < e; ++p) {
            auto s_at = [&](int k, bool& flag) {
                const double* x = ens.at(p, k);
                if (!rho.in_domain(x)) {
                    flag = true;
                    return 0.0;
                }
                double t = conv == SysConvention::reflected ? T - ens.times[k] : ens.times[k];
                double lr = rho.log_density(t, x);
                if (!(lr > kLogFloor)) flag = true;
                return -lr;
            };
            bool flag = false;
            double s0 = s_at(0, flag), s1 = s_at(nt - 1, flag);
            double m = 0.0;
            for (int k = 0; k + 1 < nt && !flag; ++k) {
                const double* x0 = ens.at(p, k);
                const double* x1 = ens.at(p, k + 1);
                for (int i = 0; i < d; ++i) xm[i] = 0.5 * (x0[i] + x1[i]);
                drift.eval(0.5 * (ens.times[k] + ens.times[k + 1]), xm, bv);
                for (int i = 0; i < d; ++i) m += bv[i] * (x1[i] - x0[i]);
            }
            // interior floor check on the coarse recorded grid
            for (int k = 1; k + 1 < nt && !flag; k += std::max(1, nt / 16)) s_at(k, flag);
            bad[p] = flag;
            sys[p] = s1 - s0;
            med[p] = 2.0 * m / eps;
        }
    });
    EntropyLedger L;
    L.convention = conv;
    L.n_input = ens.n_paths;
    for (int p = 0; p < ens.n_paths; ++p) {
        if (bad[p]) {
            ++L.excluded;
            continue;
        }
        L.ds_sys.push_back(sys[p]);
        L.ds_m.push_back(med[p]);
        double tot = sys[p] + med[p];
        L.ds_tot.push_back(tot);
        L.path_ids.push_back(ens.path_ids.empty() ? p : ens.path_ids[p]);
        L.max_identity_error = std::max(L.max_identity_error, std::abs(tot - (sys[p] + med[p])));
    }
    if (L.excluded > 0.001 * ens.n_paths) {
        std::ostringstream os;
        os << L.excluded << " of " << ens.n_paths << " paths hit the density floor; widen the density grid";
        fail(ErrorKind::Domain, os.str());
    }
    if (L.ds_tot.empty()) fail(ErrorKind::Domain, "no paths left in the entropy ledger");
    L.sys = mean_se(L.ds_sys);
    L.medium = mean_se(L.ds_m);
    L.total = mean_se(L.ds_tot);
    return L;
}

double log_rn_traj(const Path& path, const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec) {
    const int d = path.dim;
    if (d > 8) fail(ErrorKind::Domain, "log_rn_traj supports d <= 8");
    const double T = path.times.back(), eps = spec.epsilon;
    auto div_term = [&](double tau, const double* x) {
        double b[8], gl[8];
        drift.eval(tau, x, b);
        rho.grad_log(tau, x, gl);
        double bg = 0.0, gg = 0.0;
        for (int i = 0; i < d; ++i) {
            bg += b[i] * gl[i];
            gg += gl[i] * gl[i];
        }
        return drift.divergence(tau, x) + bg - 0.5 * eps * (rho.lap_log(tau, x) + gg);
    };
    double strat = 0.0, integ = 0.0;
    double xm[8], b[8], gl[8];
    double prev = div_term(T - path.times[0], path.at(0));
    for (int k = 0; k + 1 < path.size(); ++k) {
        const double* x0 = path.at(k);
        const double* x1 = path.at(k + 1);
        double dt = path.times[k + 1] - path.times[k];
        double tau_mid = T - 0.5 * (path.times[k] + path.times[k + 1]);
        for (int i = 0; i < d; ++i) xm[i] = 0.5 * (x0[i] + x1[i]);
        drift.eval(tau_mid, xm, b);
        rho.grad_log(tau_mid, xm, gl);
        for (int i = 0; i < d; ++i) strat += (b[i] - 0.5 * eps * gl[i]) * (x1[i] - x0[i]);
        double next = div_term(T - path.times[k + 1], x1);
        integ += 0.5 * dt * (prev + next);
        prev = next;
    }
    return 2.0 * strat / eps - integ;
}

constexpr double kSeFloor = 1e-12;

SecondLawReport second_law_check(const EntropyLedger& L) {
    SecondLawReport r;
    r.mean = L.total.mean;
    r.se = L.total.se;
    r.n = L.total.n;
    // roundoff floor: an exactly reversible ensemble has se = 0
    r.pass = r.mean >= -3.0 * std::max(r.se, kSeFloor);
    return r;
}

IftReport ift_check(const EntropyLedger& L) {
    IftReport r;
    r.n = static_cast<long>(L.ds_tot.size());
    double shift = -*std::min_element(L.ds_tot.begin(), L.ds_tot.end());
    Vec w(L.ds_tot.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-L.ds_tot[i] - shift);
    MeanSE m = mean_se(w);
    double scale = std::exp(shift);
    r.mean_exp = m.mean * scale;
    r.se = m.se * scale;
    r.pass = std::abs(r.mean_exp - 1.0) <= 3.0 * std::max(r.se, kSeFloor);
    return r;
}

double epr_quadrature(const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec) {
    const double eps = spec.epsilon, T = rho.horizon();
    const int nt = rho.n_t();
    Vec g(nt);
    if (rho.source() == DensityEvolution::Source::gaussian_analytic) {
        if (drift.kind != DriftSpec::Kind::linear && drift.kind != DriftSpec::Kind::zero)
            fail(ErrorKind::Specification, "analytic EPR route needs a linear drift");
        const int d = rho.dim();
        Vec Av = drift.kind == DriftSpec::Kind::linear ? drift.A : Vec(static_cast<size_t>(d) * d, 0.0);
        Vec cv = drift.offset.empty() ? Vec(d, 0.0) : drift.offset;
        Eigen::Map<const RowMat> A(Av.data(), d, d);
        Eigen::Map<const Eigen::VectorXd> c(cv.data(), d);
        for (int k = 0; k < nt; ++k) {
            double t = rho.time(k);
            Vec mt, St, mr, Sr;
            rho.moments(t, mt, St);
            rho.moments(T - t, mr, Sr);
            Eigen::Map<const RowMat> Sig(St.data(), d, d), SigR(Sr.data(), d, d);
            Eigen::Map<const Eigen::VectorXd> m(mt.data(), d), mR(mr.data(), d);
            Eigen::MatrixXd P = SigR.inverse();
            Eigen::MatrixXd B = A + 0.5 * eps * P;
            Eigen::VectorXd cc = c - 0.5 * eps * P * mR;
            g[k] = (B * Sig * B.transpose()).trace() + (B * m + cc).squaredNorm();
        }
    } else {
        const ScalarField& r = rho.rho();
        const Axis& ax = r.axes[0];
        const int n = ax.n;
        Vec lr(n);
        for (int k = 0; k < nt; ++k) {
            int kr = nt - 1 - k;
            const double* rt = r.slice_ptr(k);
            const double* rr = r.slice_ptr(kr);
            for (int i = 0; i < n; ++i) lr[i] = rr[i] > kRhoFloor ? std::log(rr[i]) : kLogFloor;
            Vec dl = gradient_1d(lr.data(), n, ax.dx());
            Vec integrand(n, 0.0);
            for (int i = 0; i < n; ++i) {
                if (rr[i] < 1e-250) continue;
                double x = ax.x(i), b;
                drift.eval(T - rho.time(k), &x, &b);
                double v = b - 0.5 * eps * dl[i];
                integrand[i] = v * v * rt[i];
            }
            g[k] = trapezoid(integrand.data(), n, ax.dx());
        }
    }
    // Simpson when the slice count allows, trapezoid otherwise
    const double h = T / (nt - 1);
    double s = 0.0;
    if ((nt - 1) % 2 == 0) {
        for (int k = 0; k < nt; ++k) s += g[k] * ((k == 0 || k == nt - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0));
        s *= h / 3.0;
    } else {
        s = trapezoid(g.data(), nt, h);
    }
    return 2.0 * s / eps;
}

Vec total_entropy_from_hj(const Path& path, const ScalarField& S, const ScalarField& S_rev, const CostSpec& spec) {
    if (S.dim() != 1 || S_rev.dim() != 1 || path.dim != 1)
        fail(ErrorKind::Domain, "HJ-difference entropy is implemented for d = 1");
    if (S_rev.has_time && std::abs(S_rev.T - spec.horizon) > 1e-9)
        fail(ErrorKind::Specification, "S_rev horizon does not match the cost specification");
    if (S.has_time && std::abs(S.T - spec.horizon) > 1e-9)
        fail(ErrorKind::Specification, "S horizon does not match the cost specification");
    // endpoint data must match the cost data: S(T) = -g, S_rev(0) = -f
    const Axis& ax = S.axes[0];
    const int kT = S.has_time ? S.n_t - 1 : 0;
    double tol = 1e-6;
    for (int i = 0; i < ax.n; i += std::max(1, ax.n / 32)) {
        double x = ax.x(i);
        double scale = 1.0 + std::abs(spec.g(x));
        if (std::abs(S.at(kT, i) + spec.g(x)) > tol * scale)
            fail(ErrorKind::Specification, "S does not carry the terminal cost of this spec");
        if (S_rev.covers(x)) {
            double fr = spec.f(x);
            if (std::abs(S_rev.interp_x(0, x) + fr) > tol * (1.0 + std::abs(fr)))
                fail(ErrorKind::Specification, "S_rev does not carry the initial cost of this spec");
        }
    }
    const double T = spec.horizon;
    Vec out(path.size());
    for (int k = 0; k < path.size(); ++k) {
        double t = path.times[k], x = path.x(k);
        out[k] = (S.interp(t, x) - S_rev.interp(T - t, x)) / spec.epsilon;
    }
    return out;
}

}  // namespace stl
