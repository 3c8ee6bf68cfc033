#include "stl/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stl/hjheat.hpp"
#include "stl/parallel.hpp"

namespace stl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Vec trapezoid_weights(const Axis& ax) {
    Vec w(ax.n, ax.dx());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

double lse(const double* v, int n) {
    double m = kNegInf;
    for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

Vec prepare_target(const ScalarField& rho, const Axis& ax, double floor, int& floored, const char* name) {
    if (rho.dim() != 1 || rho.nx() != ax.n || std::abs(rho.axes[0].min - ax.min) > 1e-12 ||
        std::abs(rho.axes[0].max - ax.max) > 1e-12)
        fail(ErrorKind::Specification, std::string(name) + " target must live on the grid axis");
    Vec r(rho.values.begin(), rho.values.begin() + ax.n);
    for (double& v : r) {
        if (!std::isfinite(v) || v < 0.0)
            fail(ErrorKind::Specification, std::string(name) + " target density must be nonnegative");
        if (v < floor) {
            v = floor;
            ++floored;
        }
    }
    double m = trapezoid(r.data(), ax.n, ax.dx());
    if (!(m > 0.0)) fail(ErrorKind::Specification, std::string(name) + " target has zero mass");
    for (double& v : r) v /= m;
    return r;
}

}  // namespace

FkKernel build_fk_kernel(const CostSpec& spec, const SpaceTimeGrid& grid) {
    if (grid.dim() != 1) fail(ErrorKind::Domain, "kernel assembly is d = 1 only");
    const Axis& ax = grid.x();
    const int n = ax.n;
    FkKernel k;
    k.axis = ax;
    k.weights = trapezoid_weights(ax);
    // column j: unit mass at y_j, propagated back to t = 0
    Vec data(static_cast<size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) data[static_cast<size_t>(j) * n + j] = 1.0 / k.weights[j];
    propagate_backward(spec, grid, data, n);
    k.K.assign(static_cast<size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double v = data[static_cast<size_t>(j) * n + i];
            k.min_raw = std::min(k.min_raw, v);
            k.K[static_cast<size_t>(i) * n + j] = std::max(v, 0.0);
        }
    return k;
}

BridgeSolution solve_schrodinger_system(const ScalarField& rho0, const ScalarField& rhoT, const CostSpec& spec,
                                        const SpaceTimeGrid& grid, const BridgeOptions& opt) {
    auto k = std::make_shared<FkKernel>(build_fk_kernel(spec, grid));
    return solve_schrodinger_system(rho0, rhoT, spec, grid, k, opt);
}

BridgeSolution solve_schrodinger_system(const ScalarField& rho0_in, const ScalarField& rhoT_in, const CostSpec& spec,
                                        const SpaceTimeGrid& grid, std::shared_ptr<const FkKernel> kernel,
                                        const BridgeOptions& opt) {
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
    const Axis& ax = grid.x();
    const int n = ax.n;
    if (!kernel || kernel->n() != n) fail(ErrorKind::Specification, "kernel does not match the grid");
    const double eps = spec.epsilon;
    BridgeSolution sol;
    Vec r0 = prepare_target(rho0_in, ax, opt.floor, sol.floored_nodes, "initial");
    Vec rT = prepare_target(rhoT_in, ax, opt.floor, sol.floored_nodes, "terminal");

    const Vec& w = kernel->weights;
    Vec logK(static_cast<size_t>(n) * n);
    for (size_t i = 0; i < logK.size(); ++i) logK[i] = kernel->K[i] > 0.0 ? std::log(kernel->K[i]) : kNegInf;
    Vec lw(n), lr0(n), lrT(n);
    for (int i = 0; i < n; ++i) {
        lw[i] = std::log(w[i]);
        lr0[i] = std::log(r0[i]);
        lrT[i] = std::log(rT[i]);
    }
    // a = -f/eps, b = -g/eps
    Vec a(n, 0.0), b(n, 0.0), tmp(n);
    auto row_lse = [&](const Vec& v, Vec& out) {  // log sum_j K_ij w_j e^{v_j}
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) tmp[j] = logK[static_cast<size_t>(i) * n + j] + lw[j] + v[j];
            out[i] = lse(tmp.data(), n);
        }
    };
    auto col_lse = [&](const Vec& v, Vec& out) {  // log sum_i K_ij w_i e^{v_i}
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) tmp[i] = logK[static_cast<size_t>(i) * n + j] + lw[i] + v[i];
            out[j] = lse(tmp.data(), n);
        }
    };
    auto l1 = [&](const Vec& logfit, const Vec& target) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += w[i] * std::abs(std::exp(logfit[i]) - target[i]);
        return s;
    };

    Vec Kb(n), Ka(n), fit(n);
    std::vector<std::string> trace;
    for (int it = 1; it <= opt.max_iter; ++it) {
        row_lse(b, Kb);
        for (int i = 0; i < n; ++i) a[i] = lr0[i] - Kb[i];
        col_lse(a, Ka);
        for (int j = 0; j < n; ++j) fit[j] = b[j] + Ka[j];
        double eT = l1(fit, rT);
        for (int j = 0; j < n; ++j) b[j] = lrT[j] - Ka[j];
        row_lse(b, Kb);
        for (int i = 0; i < n; ++i) fit[i] = a[i] + Kb[i];
        double e0 = l1(fit, r0);
        sol.history.push_back(std::max(e0, eT));
        sol.iterations = it;
        sol.l1_0 = e0;
        sol.l1_T = eT;
        if (it % 50 == 0 || it <= 3) {
            std::ostringstream os;
            os << "iter " << it << ": L1_0=" << e0 << " L1_T=" << eT;
            trace.push_back(os.str());
        }
        if (!std::isfinite(e0) || !std::isfinite(eT)) fail(ErrorKind::Convergence, "IPFP produced non-finite potentials");
        if (e0 <= opt.tol && eT <= opt.tol) break;
        if (it == opt.max_iter) {
            std::ostringstream os;
            os << "IPFP did not reach tol=" << opt.tol << " in " << opt.max_iter << " iterations";
            for (const auto& s : trace) os << "\n  " << s;
            fail(ErrorKind::Convergence, os.str());
        }
    }
    // gauge: int e^{-f/eps} = 1
    for (int i = 0; i < n; ++i) tmp[i] = a[i] + lw[i];
    const double shift = lse(tmp.data(), n);
    for (int i = 0; i < n; ++i) {
        a[i] -= shift;
        b[i] += shift;
    }
    sol.f_star = ScalarField::space(FieldLabel::other, {ax});
    sol.g_star = ScalarField::space(FieldLabel::other, {ax});
    sol.fitted_rho0 = ScalarField::space(FieldLabel::rho, {ax});
    sol.fitted_rhoT = ScalarField::space(FieldLabel::rho, {ax});
    row_lse(b, Kb);
    col_lse(a, Ka);
    for (int i = 0; i < n; ++i) {
        sol.f_star.values[i] = -eps * a[i];
        sol.g_star.values[i] = -eps * b[i];
        sol.fitted_rho0.values[i] = std::exp(a[i] + Kb[i]);
        sol.fitted_rhoT.values[i] = std::exp(b[i] + Ka[i]);
    }
    sol.kernel = std::move(kernel);
    return sol;
}

ScalarField optimal_drift(const BridgeSolution& bridge, const CostSpec& spec, const SpaceTimeGrid& grid) {
    auto table = std::make_shared<Table>();
    table->axes = bridge.g_star.axes;
    table->values = bridge.g_star.values;
    CostSpec s = spec;
    s.terminal = Potential::tabulated(table);
    return solve_hj(s, grid);
}

Vec control_costs(const DriftSpec& drift, const CostSpec& spec, const InitialCondition& init, const TimeGrid& tg,
                  int n_paths, unsigned long long seed) {
    Vec out(n_paths);
    const int batch = 2048;
    const int d = drift.dim;
    for (int start = 0; start < n_paths; start += batch) {
        int m = std::min(batch, n_paths - start);
        SimOptions so;
        so.stream_offset = start;
        so.max_escape_fraction = 0.0;
        PathEnsemble e = simulate(drift, init, spec, tg, m, seed, so);
        parallel_for(m, [&](long b, long en) {
            Vec bx(d);
            for (long p = b; p < en; ++p) {
                double run = 0.0, prev = 0.0;
                for (int k = 0; k < e.n_times(); ++k) {
                    drift.eval(e.times[k], e.at(p, k), bx.data());
                    double bb = 0.0;
                    for (int i = 0; i < d; ++i) bb += bx[i] * bx[i];
                    double cur = 0.5 * bb + spec.running.value(e.times[k], e.at(p, k));
                    if (k > 0) run += 0.5 * (e.times[k] - e.times[k - 1]) * (prev + cur);
                    prev = cur;
                }
                out[start + p] = run + spec.terminal.value(spec.horizon, e.at(p, e.n_times() - 1));
            }
        });
    }
    return out;
}

MCEstimate control_value(const DriftSpec& drift, const CostSpec& spec, const InitialCondition& init,
                         const TimeGrid& tg, int n_paths, unsigned long long seed) {
    Vec c = control_costs(drift, spec, init, tg, n_paths, seed);
    MeanSE m = mean_se(c);
    MCEstimate e;
    e.mean = m.mean;
    e.std_error = m.se;
    e.n_samples = n_paths;
    e.seed = seed;
    return e;
}

}  // namespace stl
