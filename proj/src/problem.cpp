#include "stl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stl {

namespace {

double lerp_samples(const Vec& ts, const Vec& vs, double t) {
    if (t <= ts.front()) return vs.front();
    if (t >= ts.back()) return vs.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    size_t j = static_cast<size_t>(it - ts.begin());
    double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    return (1.0 - w) * vs[j - 1] + w * vs[j];
}

}  // namespace

bool Table::contains(const double* x) const {
    for (int k = 0; k < dim(); ++k) {
        const Axis& ax = axes[k];
        double tol = 1e-12 * (ax.max - ax.min);
        if (!(x[k] >= ax.min - tol && x[k] <= ax.max + tol)) return false;
    }
    return true;
}

double Table::interpolate(const double* x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "tabulated potential queried outside its domain at x[0]=" << x[0];
        fail(ErrorKind::Domain, os.str());
    }
    const int d = dim();
    std::vector<int> lo(d);
    Vec w(d);
    for (int k = 0; k < d; ++k) {
        const Axis& ax = axes[k];
        double s = (x[k] - ax.min) / ax.dx();
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, ax.n - 2);
        lo[k] = i;
        w[k] = std::clamp(s - i, 0.0, 1.0);
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        size_t idx = 0;
        double weight = 1.0;
        for (int k = 0; k < d; ++k) {
            int bit = (corner >> k) & 1;
            idx = idx * axes[k].n + lo[k] + bit;
            weight *= bit ? w[k] : 1.0 - w[k];
        }
        if (weight != 0.0) acc += weight * values[idx];
    }
    return acc;
}

Potential Potential::zero(int dim) {
    Potential p;
    p.kind = Kind::Zero;
    p.dim = dim;
    return p;
}

Potential Potential::constant(double c, int dim) {
    Potential p;
    p.kind = Kind::Constant;
    p.dim = dim;
    p.c = c;
    return p;
}

Potential Potential::linear(Vec a) {
    Potential p;
    p.kind = Kind::Linear;
    p.dim = static_cast<int>(a.size());
    p.a = std::move(a);
    return p;
}

Potential Potential::quadratic(Vec lambda, Vec center, double offset) {
    Potential p;
    p.kind = Kind::Quadratic;
    p.dim = static_cast<int>(center.size());
    if (lambda.size() != center.size() * center.size())
        fail(ErrorKind::Specification, "quadratic lambda must be dim x dim");
    p.lambda = std::move(lambda);
    p.center = std::move(center);
    p.c = offset;
    return p;
}

Potential Potential::quadratic1(double lambda, double center, double offset) {
    return quadratic({lambda}, {center}, offset);
}

Potential Potential::double_well(double a, double b, int dim) {
    Potential p;
    p.kind = Kind::DoubleWell;
    p.dim = dim;
    p.well_a = a;
    p.well_b = b;
    return p;
}

Potential Potential::tabulated(std::shared_ptr<const Table> table) {
    Potential p;
    p.kind = Kind::Tabulated;
    p.dim = table->dim();
    p.table = std::move(table);
    return p;
}

Potential Potential::custom(int dim, std::function<double(double, const double*)> value,
                            std::function<void(double, const double*, double*)> gradient) {
    Potential p;
    p.kind = Kind::Custom;
    p.dim = dim;
    p.custom_value = std::move(value);
    p.custom_gradient = std::move(gradient);
    return p;
}

Potential Potential::with_time_scale(Vec times, Vec values) const {
    if (times.size() != values.size() || times.size() < 2)
        fail(ErrorKind::Specification, "time scale needs matching samples (at least two)");
    Potential p = *this;
    p.scale_times = std::move(times);
    p.scale_values = std::move(values);
    return p;
}

double Potential::time_factor(double t) const {
    if (scale_times.empty()) return 1.0;
    return lerp_samples(scale_times, scale_values, t);
}

double Potential::value(double t, const double* x) const {
    double v = 0.0;
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: v = c; break;
    case Kind::Linear:
        for (int i = 0; i < dim; ++i) v += a[i] * x[i];
        break;
    case Kind::Quadratic: {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                v += 0.5 * (x[i] - center[i]) * lambda[i * dim + j] * (x[j] - center[j]);
        v += c;
        break;
    }
    case Kind::DoubleWell: {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        double q = r2 - well_b * well_b;
        v = well_a * q * q;
        break;
    }
    case Kind::Tabulated: v = table->interpolate(x); break;
    case Kind::Custom: v = custom_value(t, x); break;
    }
    return time_factor(t) * v;
}

void Potential::gradient(double t, const double* x, double* out) const {
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
    switch (kind) {
    case Kind::Zero:
    case Kind::Constant: return;
    case Kind::Linear:
        for (int i = 0; i < dim; ++i) out[i] = a[i];
        break;
    case Kind::Quadratic:
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) out[i] += 0.5 * (lambda[i * dim + j] + lambda[j * dim + i]) * (x[j] - center[j]);
        break;
    case Kind::DoubleWell: {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        double q = r2 - well_b * well_b;
        for (int i = 0; i < dim; ++i) out[i] = 4.0 * well_a * q * x[i];
        break;
    }
    case Kind::Tabulated: {
        Vec y(x, x + dim);
        for (int k = 0; k < dim; ++k) {
            double h = table->axes[k].dx();
            double x0 = x[k];
            y[k] = x0 + h;
            bool up = table->contains(y.data());
            double fp = up ? table->interpolate(y.data()) : 0.0;
            y[k] = x0 - h;
            bool dn = table->contains(y.data());
            double fm = dn ? table->interpolate(y.data()) : 0.0;
            y[k] = x0;
            if (up && dn) {
                out[k] = (fp - fm) / (2.0 * h);
            } else {
                double f0 = table->interpolate(y.data());
                out[k] = up ? (fp - f0) / h : (f0 - fm) / h;
            }
        }
        break;
    }
    case Kind::Custom: custom_gradient(t, x, out); break;
    }
    double s = time_factor(t);
    if (s != 1.0)
        for (int i = 0; i < dim; ++i) out[i] *= s;
}

double Potential::second_derivative(double t, double x) const {
    double s = time_factor(t);
    switch (kind) {
    case Kind::Zero:
    case Kind::Constant:
    case Kind::Linear: return 0.0;
    case Kind::Quadratic: return s * lambda[0];
    case Kind::DoubleWell: return s * 4.0 * well_a * (3.0 * x * x - well_b * well_b);
    default: {
        double h = 1e-4 * (1.0 + std::abs(x));
        return (gradient(t, x + h) - gradient(t, x - h)) / (2.0 * h);
    }
    }
}

std::optional<Vec> Potential::argmin_hint(const double* near) const {
    switch (kind) {
    case Kind::Quadratic: return center;
    case Kind::DoubleWell: {
        double r = 0.0;
        for (int i = 0; i < dim; ++i) r += near[i] * near[i];
        r = std::sqrt(r);
        Vec out(dim, 0.0);
        if (r == 0.0) {
            out[0] = well_b;
        } else {
            for (int i = 0; i < dim; ++i) out[i] = near[i] * well_b / r;
        }
        return out;
    }
    default: return std::nullopt;
    }
}

std::string Potential::kind_name() const {
    switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::Linear: return "linear";
    case Kind::Quadratic: return "quadratic";
    case Kind::DoubleWell: return "double_well";
    case Kind::Tabulated: return "tabulated";
    case Kind::Custom: return "custom";
    }
    return "unknown";
}

void Potential::validate(std::vector<std::string>& violations, const std::string& label, double horizon) const {
    if (dim < 1) violations.push_back(label + ": dimension must be at least 1");
    if (kind == Kind::Linear && static_cast<int>(a.size()) != dim)
        violations.push_back(label + ": linear coefficient length must equal dim");
    if (kind == Kind::Quadratic) {
        if (static_cast<int>(lambda.size()) != dim * dim || static_cast<int>(center.size()) != dim) {
            violations.push_back(label + ": quadratic lambda/center shape mismatch");
        } else {
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j)
                    if (std::abs(lambda[i * dim + j] - lambda[j * dim + i]) > 1e-12)
                        violations.push_back(label + ": quadratic lambda must be symmetric");
        }
    }
    if (kind == Kind::Tabulated) {
        if (!table) {
            violations.push_back(label + ": tabulated potential has no table");
        } else {
            for (double v : table->values)
                if (!std::isfinite(v)) {
                    violations.push_back(label + ": tabulated values must be finite");
                    break;
                }
        }
    }
    if (!scale_times.empty()) {
        if (scale_times.front() > 0.0 || scale_times.back() < horizon)
            violations.push_back(label + ": time samples must cover [0,T]");
        for (size_t i = 1; i < scale_times.size(); ++i)
            if (!(scale_times[i] > scale_times[i - 1])) {
                violations.push_back(label + ": time samples must be increasing");
                break;
            }
    }
}

double eval_potential(const Potential& p, double t, const Vec& x) {
    if (static_cast<int>(x.size()) != p.dim) fail(ErrorKind::Domain, "point dimension does not match potential");
    return p.value(t, x.data());
}

Vec eval_gradient(const Potential& p, double t, const Vec& x) {
    if (static_cast<int>(x.size()) != p.dim) fail(ErrorKind::Domain, "point dimension does not match potential");
    Vec g(x.size());
    p.gradient(t, x.data(), g.data());
    return g;
}

SpaceTimeGrid SpaceTimeGrid::line(double x_min, double x_max, int n_x, int n_t, double T) {
    SpaceTimeGrid g;
    g.axes = {Axis{x_min, x_max, n_x}};
    g.n_t = n_t;
    g.T = T;
    return g;
}

ValidationReport validate_spec(const CostSpec& spec, const SpaceTimeGrid& grid, const std::optional<Window>& roi) {
    ValidationReport r;
    if (!(spec.epsilon > 0.0)) r.violations.push_back("epsilon must be positive");
    if (!(spec.horizon > 0.0)) r.violations.push_back("horizon must be positive");
    if (spec.dim < 1) r.violations.push_back("dim must be at least 1");
    spec.running.validate(r.violations, "running_cost", spec.horizon);
    spec.terminal.validate(r.violations, "terminal_cost", spec.horizon);
    if (spec.initial) spec.initial->validate(r.violations, "initial_cost", spec.horizon);
    auto check_dim = [&](const Potential& p, const char* label) {
        if (p.kind != Potential::Kind::Zero && p.kind != Potential::Kind::Constant && p.dim != spec.dim)
            r.violations.push_back(std::string(label) + ": dimension does not match spec");
    };
    check_dim(spec.running, "running_cost");
    check_dim(spec.terminal, "terminal_cost");
    if (spec.initial) check_dim(*spec.initial, "initial_cost");

    if (grid.dim() != spec.dim) r.violations.push_back("grid dimension must equal spec dim");
    if (grid.n_t < 2) r.violations.push_back("n_t must be at least 2");
    if (std::abs(grid.T - spec.horizon) > 1e-12 * std::max(1.0, spec.horizon))
        r.violations.push_back("grid horizon must equal spec horizon");
    for (size_t k = 0; k < grid.axes.size(); ++k) {
        const Axis& ax = grid.axes[k];
        if (!(ax.min < ax.max)) r.violations.push_back("x_min must be below x_max on every axis");
        if (ax.n < 8) r.violations.push_back("n_x must be at least 8 on every axis");
    }
    if (!r.violations.empty()) return r;

    double dt = grid.dt();
    for (size_t k = 0; k < grid.axes.size(); ++k) {
        const Axis& ax = grid.axes[k];
        double dx = ax.dx();
        double cfl = spec.epsilon * dt / (dx * dx);
        if (cfl > 0.5) {
            std::ostringstream os;
            os << "eps*dt/dx^2 = " << cfl << " exceeds 0.5 on axis " << k << " (explicit components unstable)";
            r.warnings.push_back(os.str());
        }
        double pad = 4.0 * std::sqrt(spec.epsilon * spec.horizon);
        double lo = 0.5 * (ax.min + ax.max), hi = lo;
        if (roi && k < roi->lo.size()) {
            lo = roi->lo[k];
            hi = roi->hi[k];
        }
        if (lo - ax.min < pad || ax.max - hi < pad) {
            std::ostringstream os;
            os << "domain narrower than 4*sqrt(eps*T) = " << pad << " beyond the region of interest on axis " << k;
            r.warnings.push_back(os.str());
        }
    }
    return r;
}

void Path::check() const {
    if (times.empty()) fail(ErrorKind::Domain, "empty path");
    if (states.size() != times.size() * static_cast<size_t>(dim)) fail(ErrorKind::Domain, "path state shape mismatch");
    if (times.front() != 0.0) fail(ErrorKind::Domain, "path must start at t=0");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) fail(ErrorKind::Domain, "path times must be strictly increasing");
    for (double v : states)
        if (!std::isfinite(v)) fail(ErrorKind::Domain, "path states must be finite");
}

Path uniform_path(double T, int n_steps, const std::function<double(double)>& x_of_t) {
    Path p;
    p.dim = 1;
    p.times.resize(n_steps + 1);
    p.states.resize(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) {
        double t = k == n_steps ? T : T * k / n_steps;
        p.times[k] = t;
        p.states[k] = x_of_t(t);
    }
    return p;
}

Path PathEnsemble::path(int p) const {
    Path out;
    out.dim = dim;
    out.times = times;
    auto first = states.begin() + static_cast<std::ptrdiff_t>(static_cast<size_t>(p) * times.size() * dim);
    out.states.assign(first, first + static_cast<std::ptrdiff_t>(times.size() * dim));
    return out;
}

Vec PathEnsemble::terminal(int component) const { return marginal(n_times() - 1, component); }

Vec PathEnsemble::marginal(int k, int component) const {
    Vec out(n_paths);
    for (int p = 0; p < n_paths; ++p) out[p] = at(p, k)[component];
    return out;
}

}  // namespace stl
