#pragma once

#include <optional>
#include <vector>

#include "stl/field.hpp"
#include "stl/problem.hpp"
#include "stl/stats.hpp"

namespace stl {

double heat_kernel(double t, const Vec& x, double epsilon);

struct HeatOptions {
    // Per-slice rescaling with the scale kept in log space. Auto-enabled when
    // |g|/eps or |V|T/eps exceeds 700 on the grid.
    std::optional<bool> log_domain;
};

// log phi over all slices (row k = t_k); the primitive the other routes share.
ScalarField backward_heat_log(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});
ScalarField forward_heat_log(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});

ScalarField solve_backward_heat(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});
ScalarField solve_forward_heat(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});

// Pure propagation of arbitrary terminal data through the backward scheme;
// columns of `data` (n_x rows, n_cols columns, column-major) are advanced in place to t=0.
void propagate_backward(const CostSpec& spec, const SpaceTimeGrid& grid, std::vector<double>& data, int n_cols);

bool needs_log_domain(const CostSpec& spec, const SpaceTimeGrid& grid, bool forward);

MCEstimate feynman_kac(double t, const Vec& x, const CostSpec& spec, long n_samples, unsigned long long seed,
                       int n_substeps);

ScalarField solve_hj(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});
ScalarField solve_hj_reversed(const CostSpec& spec, const SpaceTimeGrid& grid, const HeatOptions& opt = {});

// Interior residual of the forward (or, with reversed, the time-reversed) HJ
// equation; boundary ring set to zero.
ScalarField hj_residual(const ScalarField& S, const CostSpec& spec, bool reversed = false);
// d=1 residual of the drift equation for b = dS/dx; two-node ring set to zero.
ScalarField nh_residual(const ScalarField& S, const CostSpec& spec);

// max |f| over interior nodes with |x - centre| <= half_width (all interior when half_width <= 0)
double max_abs_interior(const ScalarField& f, double half_width = 0.0, int ring = 1);
// Usable half-width: grid half-extent less the 4*sqrt(eps*T) padding
double default_window(const CostSpec& spec, const SpaceTimeGrid& grid);

struct ClassicalOptions {
    int n_x = 65;          // lattice nodes in x
    int n_t = 21;          // lattice slices in t
    double x_lo = 0.0;     // lattice extent; defaults to the grid axis when x_lo == x_hi
    double x_hi = 0.0;
    int el_steps = 400;
    double tol = 1e-10;
};

struct ClassicalSolution {
    ScalarField S0;        // on the coarse lattice
    double inf_om_at_x0 = 0.0;
};

ClassicalSolution solve_hj_classical(const CostSpec& spec, const SpaceTimeGrid& grid, double x0,
                                     const ClassicalOptions& opt = {});

struct SmallNoiseRow {
    double epsilon;
    double gap;
};

struct SmallNoiseReport {
    std::vector<SmallNoiseRow> rows;
    bool monotone_decrease = false;
};

SmallNoiseReport hj_smallnoise_convergence(const CostSpec& spec, const SpaceTimeGrid& grid, const Vec& eps_list,
                                           double window = 1.0, const ClassicalOptions& opt = {});

}  // namespace stl
