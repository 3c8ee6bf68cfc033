#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stl/field.hpp"
#include "stl/problem.hpp"

namespace stl {

struct ActionReport {
    double value = 0.0;
    Path path;
    double gradient_norm = 0.0;
    std::string method;  // "shooting" or "direct"
    int iterations = 0;
    Vec initial_velocity;
    std::vector<std::string> trace;
    int starts = 1;
};

double om_functional(const Path& path, const CostSpec& spec);
double lagrangian(const CostSpec& spec, double t, const Vec& x, const Vec& v);
double hamiltonian(const CostSpec& spec, double t, const Vec& x, const Vec& p);

struct ELOptions {
    int n_steps = 1000;
    int max_iter = 60;
    std::optional<Vec> initial_velocity;
};

// Shooting on the initial velocity for  gamma'' = grad V,  gamma(0) = x0,
// gamma'(T) = -grad g(gamma(T)).
ActionReport solve_euler_lagrange(const Vec& x0, const CostSpec& spec, double tol, const ELOptions& opt = {});

struct DirectOptions {
    int max_iter = 20000;
    int multistart = 1;
    unsigned long long seed = 7;
    double perturb = 0.5;
    std::optional<Path> initial;
};

// Preconditioned L-BFGS on the discretised action over n_knots intervals.
ActionReport minimize_om_direct(const Vec& x0, const CostSpec& spec, int n_knots, double tol,
                                const DirectOptions& opt = {});

// Straight line from x0 to the obvious minimiser of g (or the constant path).
Path straight_line_initial(const Vec& x0, const CostSpec& spec, int n_knots);

double rate_function(const Path& path, const Vec& x0, const CostSpec& spec, double inf_om);

double fw_om_identity_check(const Path& gamma, const ScalarField& S0, const CostSpec& spec, double inf_om);

enum class LdpMethod { grid, mc };

struct LdpOptions {
    LdpMethod method = LdpMethod::grid;
    SpaceTimeGrid grid;
    long mc_samples = 20000;
    unsigned long long seed = 1;
    int mc_substeps = 200;
    double inf_om = std::numeric_limits<double>::quiet_NaN();  // computed by shooting when NaN
};

struct LdpRow {
    double epsilon = 0.0;
    double eps_log_z = 0.0;
    double std_error = 0.0;  // of eps*logZ, MC only
};

struct LdpReport {
    std::vector<LdpRow> rows;
    double extrapolated = 0.0;   // Richardson on the two smallest eps
    double fit_intercept = 0.0;  // least squares a + b*eps over all rows
    double fit_slope = 0.0;
    double target = 0.0;         // -inf OM
    std::vector<std::string> advisories;
};

LdpReport ldp_z_asymptotics(const Vec& x0, const CostSpec& spec_template, const Vec& eps_list,
                            const LdpOptions& opt);

}  // namespace stl
