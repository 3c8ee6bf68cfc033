#include "stl/sde.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "stl/parallel.hpp"
#include "stl/rng.hpp"
#include "stl/stats.hpp"

namespace stl {

DriftSpec DriftSpec::zero(int dim) {
    DriftSpec d;
    d.kind = Kind::zero;
    d.dim = dim;
    return d;
}

DriftSpec DriftSpec::gradient_of(const ScalarField& S) {
    if (S.dim() != 1) fail(ErrorKind::Domain, "gradient_of drifts are tabulated in d = 1 only");
    DriftSpec d;
    d.kind = Kind::gradient_of;
    d.dim = 1;
    d.horizon = S.T;
    auto g = std::make_shared<ScalarField>(S);
    auto g2 = std::make_shared<ScalarField>(S);
    g->label = g2->label = FieldLabel::other;
    const int n = S.nx();
    const double dx = S.axes[0].dx();
    for (int k = 0; k < (S.has_time ? S.n_t : 1); ++k) {
        Vec gr = gradient_1d(S.slice_ptr(k), n, dx);
        Vec lp = laplacian_1d(S.slice_ptr(k), n, dx);
        std::copy(gr.begin(), gr.end(), g->slice_ptr(k));
        std::copy(lp.begin(), lp.end(), g2->slice_ptr(k));
    }
    d.grad = g;
    d.grad2 = g2;
    return d;
}

DriftSpec DriftSpec::registry(const Potential& p, double sign) {
    DriftSpec d;
    d.kind = Kind::registry;
    d.dim = p.dim;
    d.potential = p;
    d.sign = sign;
    return d;
}

DriftSpec DriftSpec::linear(Vec A, int dim, Vec offset) {
    if (A.size() != static_cast<size_t>(dim) * dim) fail(ErrorKind::Specification, "linear drift matrix must be d x d");
    if (!offset.empty() && offset.size() != static_cast<size_t>(dim))
        fail(ErrorKind::Specification, "linear drift offset must have d entries");
    DriftSpec d;
    d.kind = Kind::linear;
    d.dim = dim;
    d.A = std::move(A);
    d.offset = std::move(offset);
    return d;
}

DriftSpec DriftSpec::tabulated(const std::vector<ScalarField>& components) {
    if (components.empty()) fail(ErrorKind::Specification, "tabulated drift needs components");
    for (const auto& c : components)
        if (c.dim() != 1) fail(ErrorKind::Domain, "tabulated drifts are supported in d = 1 only");
    DriftSpec d;
    d.kind = Kind::tabulated;
    d.dim = static_cast<int>(components.size());
    if (d.dim != 1) fail(ErrorKind::Domain, "tabulated drifts are supported in d = 1 only");
    for (const auto& c : components) d.components.push_back(std::make_shared<ScalarField>(c));
    d.horizon = components[0].T;
    return d;
}

DriftSpec DriftSpec::custom(int dim, std::function<void(double, const double*, double*)> fn,
                            std::function<double(double, const double*)> div) {
    DriftSpec d;
    d.kind = Kind::custom;
    d.dim = dim;
    d.fn = std::move(fn);
    d.div_fn = std::move(div);
    return d;
}

DriftSpec DriftSpec::reversed(double T) const {
    DriftSpec d = *this;
    d.time_reversed = !time_reversed;
    d.horizon = T;
    return d;
}

void DriftSpec::eval(double t, const double* x, double* out) const {
    if (time_reversed) t = horizon - t;
    switch (kind) {
    case Kind::zero:
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
        return;
    case Kind::gradient_of: out[0] = grad->interp(t, x[0]); return;
    case Kind::registry:
        potential.gradient(t, x, out);
        for (int i = 0; i < dim; ++i) out[i] *= sign;
        return;
    case Kind::linear:
        for (int i = 0; i < dim; ++i) {
            double s = offset.empty() ? 0.0 : offset[i];
            for (int j = 0; j < dim; ++j) s += A[i * dim + j] * x[j];
            out[i] = s;
        }
        return;
    case Kind::tabulated:
        for (int i = 0; i < dim; ++i) out[i] = components[i]->interp(t, x[0]);
        return;
    case Kind::custom: fn(t, x, out); return;
    }
}

double DriftSpec::divergence(double t, const double* x) const {
    double tt = time_reversed ? horizon - t : t;
    switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::gradient_of: return grad2->interp(tt, x[0]);
    case Kind::linear: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += A[i * dim + i];
        return s;
    }
    case Kind::registry:
        if (dim == 1) return sign * potential.second_derivative(tt, x[0]);
        break;
    case Kind::custom:
        if (div_fn) return div_fn(tt, x);
        break;
    default: break;
    }
    // central differences on the drift itself
    Vec xp(x, x + dim), bp(dim), bm(dim);
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        double h = 1e-5 * (1.0 + std::abs(x[i]));
        xp[i] = x[i] + h;
        eval(t, xp.data(), bp.data());
        xp[i] = x[i] - h;
        eval(t, xp.data(), bm.data());
        xp[i] = x[i];
        s += (bp[i] - bm[i]) / (2.0 * h);
    }
    return s;
}

bool DriftSpec::in_domain(const double* x) const {
    for (int i = 0; i < dim; ++i)
        if (!std::isfinite(x[i])) return false;
    if (box) {
        for (int i = 0; i < dim; ++i)
            if (x[i] < box->lo[i] || x[i] > box->hi[i]) return false;
    }
    switch (kind) {
    case Kind::gradient_of: return grad->covers(x[0]);
    case Kind::tabulated: return components[0]->covers(x[0]);
    default: return true;
    }
}

std::string DriftSpec::kind_name() const {
    switch (kind) {
    case Kind::zero: return "zero";
    case Kind::gradient_of: return "gradient_of";
    case Kind::registry: return "registry";
    case Kind::linear: return "linear";
    case Kind::tabulated: return "tabulated";
    case Kind::custom: return "custom";
    }
    return "?";
}

InitialCondition InitialCondition::point(Vec x) {
    InitialCondition c;
    c.kind = Kind::point;
    c.x = std::move(x);
    return c;
}

InitialCondition InitialCondition::from_density(const ScalarField& rho) {
    if (rho.dim() != 1) fail(ErrorKind::Domain, "density initial laws are supported in d = 1 only");
    InitialCondition c;
    c.kind = Kind::density;
    c.density = rho.has_time ? rho.slice_field(0) : rho;
    double mass = trapezoid(c.density.values.data(), c.density.nx(), c.density.axes[0].dx());
    for (double v : c.density.values)
        if (v < 0.0 || !std::isfinite(v)) fail(ErrorKind::Specification, "initial density must be nonnegative");
    if (std::abs(mass - 1.0) > 1e-3) fail(ErrorKind::Specification, "initial density is not normalized");
    return c;
}

InitialCondition InitialCondition::gaussian(Vec mean, Vec cov) {
    if (cov.size() != mean.size() * mean.size()) fail(ErrorKind::Specification, "gaussian covariance must be d x d");
    InitialCondition c;
    c.kind = Kind::gaussian;
    c.mean = std::move(mean);
    c.cov = std::move(cov);
    return c;
}

InitialCondition InitialCondition::from_evolution(const DensityEvolution& rho, int slice) {
    InitialCondition c;
    c.kind = Kind::evolution;
    c.evolution = &rho;
    c.slice = slice;
    return c;
}

int InitialCondition::dim() const {
    switch (kind) {
    case Kind::point: return static_cast<int>(x.size());
    case Kind::density: return 1;
    case Kind::gaussian: return static_cast<int>(mean.size());
    case Kind::evolution: return evolution->dim();
    }
    return 1;
}

PathEnsemble simulate(const DriftSpec& drift, const InitialCondition& init, const CostSpec& spec,
                      const TimeGrid& tg, int n_paths, unsigned long long master_seed, const SimOptions& opt) {
    const int d = drift.dim;
    if (init.dim() != d) fail(ErrorKind::Specification, "initial condition and drift dimensions differ");
    if (n_paths < 1) fail(ErrorKind::Domain, "n_paths must be positive");
    if (tg.n_steps < 1 || !(tg.T > 0.0)) fail(ErrorKind::Domain, "time grid needs T > 0 and at least one step");
    if (spec.epsilon < 0.0) fail(ErrorKind::Domain, "epsilon must be nonnegative");
    const int stride = std::max(1, opt.record_stride);

    std::vector<int> rec_steps;
    for (int k = 0; k <= tg.n_steps; k += stride) rec_steps.push_back(k);
    if (rec_steps.back() != tg.n_steps) rec_steps.push_back(tg.n_steps);
    const int n_rec = static_cast<int>(rec_steps.size());

    PathEnsemble ens;
    ens.dim = d;
    ens.master_seed = master_seed;
    for (int k : rec_steps) ens.times.push_back(tg.t(k));
    ens.states.assign(static_cast<size_t>(n_paths) * n_rec * d, 0.0);
    std::vector<char> escaped(n_paths, 0);

    std::optional<GridCdf> cdf;
    if (init.kind == InitialCondition::Kind::density)
        cdf.emplace(init.density.axes[0].min, init.density.axes[0].dx(), init.density.values);
    else if (init.kind == InitialCondition::Kind::evolution &&
             init.evolution->source() == DensityEvolution::Source::fpe_grid)
        cdf.emplace(init.evolution->rho().axes[0].min, init.evolution->rho().axes[0].dx(),
                    init.evolution->rho().slice(init.slice));
    Eigen::MatrixXd L;
    if (init.kind == InitialCondition::Kind::gaussian) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(init.cov.data(), d, d);
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) fail(ErrorKind::Specification, "initial covariance is not positive definite");
        L = llt.matrixL();
    }

    const CounterRng rng(master_seed);
    const double sq = std::sqrt(spec.epsilon * tg.dt());
    parallel_for(n_paths, [&](long b, long e) {
        Vec x(d), bx(d), xi(d);
        for (long p = b; p < e; ++p) {
            const uint64_t stream = static_cast<uint64_t>(p + opt.stream_offset);
            switch (init.kind) {
            case InitialCondition::Kind::point: x = init.x; break;
            case InitialCondition::Kind::density: x[0] = cdf->inverse(rng.uniform(stream, kInitStep)); break;
            case InitialCondition::Kind::gaussian: {
                rng.normals(stream, kInitStep, xi.data(), d);
                for (int i = 0; i < d; ++i) {
                    double s = init.mean[i];
                    for (int j = 0; j <= i; ++j) s += L(i, j) * xi[j];
                    x[i] = s;
                }
                break;
            }
            case InitialCondition::Kind::evolution:
                if (cdf) {
                    x[0] = cdf->inverse(rng.uniform(stream, kInitStep));
                } else {
                    rng.normals(stream, kInitStep, xi.data(), d);
                    init.evolution->sample(init.slice, xi.data(), x.data());
                }
                break;
            }
            double* out = ens.states.data() + static_cast<size_t>(p) * n_rec * d;
            std::copy(x.begin(), x.end(), out);
            int r = 1;
            bool esc = !drift.in_domain(x.data());
            for (int k = 0; k < tg.n_steps && !esc; ++k) {
                drift.eval(tg.t(k), x.data(), bx.data());
                rng.normals(stream, k, xi.data(), d);
                for (int i = 0; i < d; ++i) x[i] += bx[i] * tg.dt() + sq * xi[i];
                if (!drift.in_domain(x.data())) esc = true;
                if (r < n_rec && rec_steps[r] == k + 1) {
                    std::copy(x.begin(), x.end(), out + static_cast<size_t>(r) * d);
                    ++r;
                }
            }
            escaped[p] = esc;
        }
    });

    // compact survivors, preserving order
    int kept = 0;
    const size_t block = static_cast<size_t>(n_rec) * d;
    for (int p = 0; p < n_paths; ++p) {
        if (escaped[p]) continue;
        if (kept != p)
            std::copy(ens.states.begin() + p * block, ens.states.begin() + (p + 1) * block,
                      ens.states.begin() + kept * block);
        ens.path_ids.push_back(static_cast<int>(p + opt.stream_offset));
        ++kept;
    }
    ens.states.resize(kept * block);
    ens.states.shrink_to_fit();
    ens.n_paths = kept;
    ens.n_escaped = n_paths - kept;
    if (ens.n_escaped > opt.max_escape_fraction * n_paths) {
        std::ostringstream os;
        os << ens.n_escaped << " of " << n_paths << " paths left the drift domain (limit "
           << 100.0 * opt.max_escape_fraction << "%); widen the grid";
        fail(ErrorKind::Domain, os.str());
    }
    return ens;
}

PathEnsemble simulate_time_reversed(const DriftSpec& forward_drift, const DensityEvolution& rho, const CostSpec& spec,
                                    const TimeGrid& tg, int n_paths, unsigned long long seed, const SimOptions& opt) {
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "time reversal needs epsilon > 0");
    if (std::abs(rho.horizon() - tg.T) > 1e-12 * std::max(1.0, tg.T))
        fail(ErrorKind::Specification, "density horizon must match the time grid");
    const double T = tg.T, eps = spec.epsilon;
    const int d = forward_drift.dim;
    DriftSpec rev = DriftSpec::custom(d, [&forward_drift, &rho, T, eps, d](double t, const double* x, double* out) {
        double b[8], gl[8];
        forward_drift.eval(T - t, x, b);
        rho.grad_log(T - t, x, gl);
        for (int i = 0; i < d; ++i) out[i] = -b[i] + eps * gl[i];
    });
    if (rho.source() == DensityEvolution::Source::fpe_grid) {
        const Axis& ax = rho.rho().axes[0];
        rev.box = Window{{ax.min}, {ax.max}};
    }
    if (d > 8) fail(ErrorKind::Domain, "time reversal supports d <= 8");
    return simulate(rev, InitialCondition::from_evolution(rho, rho.n_t() - 1), spec, tg, n_paths, seed, opt);
}

double girsanov_log_weight(const Path& path, const DriftSpec& drift, const CostSpec& spec) {
    if (!(spec.epsilon > 0.0)) fail(ErrorKind::Domain, "Girsanov weight needs epsilon > 0");
    const int d = path.dim;
    Vec b(d);
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k + 1 < path.size(); ++k) {
        double dt = path.times[k + 1] - path.times[k];
        drift.eval(path.times[k], path.at(k), b.data());
        for (int i = 0; i < d; ++i) {
            s1 += b[i] * (path.at(k + 1)[i] - path.at(k)[i]);
            s2 += b[i] * b[i] * dt;
        }
    }
    return (s1 - 0.5 * s2) / spec.epsilon;
}

double pathwise_identity_residual(const Path& path, const DriftSpec& grad_S, const CostSpec& spec, double logZ_at_x) {
    const int d = path.dim;
    Vec b(d);
    double ito = 0.0, quad = 0.0, run = 0.0;
    for (int k = 0; k + 1 < path.size(); ++k) {
        double dt = path.times[k + 1] - path.times[k];
        grad_S.eval(path.times[k], path.at(k), b.data());
        for (int i = 0; i < d; ++i) {
            ito += b[i] * (path.at(k + 1)[i] - path.at(k)[i]);
            quad += b[i] * b[i] * dt;
        }
        run += 0.5 * dt * (spec.running.value(path.times[k], path.at(k)) +
                           spec.running.value(path.times[k + 1], path.at(k + 1)));
    }
    double phi = run + spec.terminal.value(spec.horizon, path.at(path.size() - 1));
    return spec.epsilon * logZ_at_x + phi + ito - 0.5 * quad;
}

double pathwise_identity_residual(const Path& path, const ScalarField& S, const CostSpec& spec, double logZ_at_x) {
    return pathwise_identity_residual(path, DriftSpec::gradient_of(S), spec, logZ_at_x);
}

}  // namespace stl
