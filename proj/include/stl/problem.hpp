#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stl/error.hpp"

namespace stl {

using Vec = std::vector<double>;

// Uniform axis, node i sits at min + i*dx.
struct Axis {
    double min = 0.0;
    double max = 1.0;
    int n = 2;

    double dx() const { return (max - min) / (n - 1); }
    double x(int i) const { return min + i * dx(); }
    bool contains(double v) const { return v >= min && v <= max; }
};

// Values on a tensor grid, last axis fastest.
struct Table {
    std::vector<Axis> axes;
    Vec values;

    int dim() const { return static_cast<int>(axes.size()); }
    double interpolate(const double* x) const;
    bool contains(const double* x) const;
};

struct Potential {
    enum class Kind { Zero, Constant, Linear, Quadratic, DoubleWell, Tabulated, Custom };

    Kind kind = Kind::Zero;
    int dim = 1;
    double c = 0.0;       // constant value, or additive offset for quadratic
    Vec a;                // linear coefficients
    Vec lambda;           // quadratic matrix, row-major dim x dim
    Vec center;           // quadratic center
    double well_a = 0.0;  // double well a(|x|^2 - b^2)^2
    double well_b = 0.0;
    std::shared_ptr<const Table> table;
    std::function<double(double, const double*)> custom_value;
    std::function<void(double, const double*, double*)> custom_gradient;

    // separable time factor s(t), linear interpolation between samples
    Vec scale_times;
    Vec scale_values;

    static Potential zero(int dim = 1);
    static Potential constant(double c, int dim = 1);
    static Potential linear(Vec a);
    static Potential quadratic(Vec lambda, Vec center, double offset = 0.0);
    static Potential quadratic1(double lambda, double center = 0.0, double offset = 0.0);
    static Potential double_well(double a, double b, int dim = 1);
    static Potential tabulated(std::shared_ptr<const Table> table);
    static Potential custom(int dim, std::function<double(double, const double*)> value,
                            std::function<void(double, const double*, double*)> gradient);

    Potential with_time_scale(Vec times, Vec values) const;

    bool is_static() const { return scale_times.empty(); }
    double time_factor(double t) const;

    double value(double t, const double* x) const;
    void gradient(double t, const double* x, double* out) const;
    double value(double t, double x) const { return value(t, &x); }
    double gradient(double t, double x) const {
        double g;
        gradient(t, &x, &g);
        return g;
    }
    // d=1 second derivative, analytic where available
    double second_derivative(double t, double x) const;

    // Unconstrained minimiser if the kind has an obvious one.
    std::optional<Vec> argmin_hint(const double* near) const;

    std::string kind_name() const;
    void validate(std::vector<std::string>& violations, const std::string& label, double horizon) const;
};

double eval_potential(const Potential& p, double t, const Vec& x);
Vec eval_gradient(const Potential& p, double t, const Vec& x);

struct CostSpec {
    double epsilon = 1.0;
    double horizon = 1.0;
    int dim = 1;
    Potential running = Potential::zero();
    Potential terminal = Potential::zero();
    std::optional<Potential> initial;

    double V(double t, double x) const { return running.value(t, x); }
    double g(double x) const { return terminal.value(horizon, x); }
    double f(double x) const { return initial ? initial->value(0.0, x) : 0.0; }
};

struct SpaceTimeGrid {
    std::vector<Axis> axes;  // spatial axes
    int n_t = 2;
    double T = 1.0;

    static SpaceTimeGrid line(double x_min, double x_max, int n_x, int n_t, double T);

    int dim() const { return static_cast<int>(axes.size()); }
    const Axis& x() const { return axes.at(0); }
    double dt() const { return T / (n_t - 1); }
    double t(int k) const { return k == n_t - 1 ? T : k * dt(); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

// Optional region of interest used for coverage warnings; defaults to the grid centre.
struct Window {
    Vec lo;
    Vec hi;
};

ValidationReport validate_spec(const CostSpec& spec, const SpaceTimeGrid& grid,
                               const std::optional<Window>& roi = std::nullopt);

struct Path {
    Vec times;
    Vec states;  // n_times x dim
    int dim = 1;

    int size() const { return static_cast<int>(times.size()); }
    const double* at(int k) const { return states.data() + static_cast<size_t>(k) * dim; }
    double x(int k) const { return states[static_cast<size_t>(k) * dim]; }
    void check() const;
};

Path uniform_path(double T, int n_steps, const std::function<double(double)>& x_of_t);

struct PathEnsemble {
    Vec times;
    int dim = 1;
    int n_paths = 0;
    Vec states;  // n_paths x n_times x dim
    std::vector<int> path_ids;
    unsigned long long master_seed = 0;
    Vec weights;  // optional
    int n_escaped = 0;

    int n_times() const { return static_cast<int>(times.size()); }
    const double* at(int p, int k) const {
        return states.data() + (static_cast<size_t>(p) * times.size() + k) * dim;
    }
    double* at(int p, int k) {
        return states.data() + (static_cast<size_t>(p) * times.size() + k) * dim;
    }
    Path path(int p) const;
    Vec terminal(int component = 0) const;
    Vec marginal(int k, int component = 0) const;
};

}  // namespace stl
