#pragma once

#include <string>
#include <vector>

#include "stl/density.hpp"
#include "stl/field.hpp"
#include "stl/problem.hpp"
#include "stl/sde.hpp"
#include "stl/stats.hpp"

namespace stl {

// Grid route (d=1): Scharfetter-Gummel fluxes, Crank-Nicolson in time, zero flux
// at the ends. init_density is a space-only field on the grid axis.
DensityEvolution evolve_fpe(const ScalarField& init_density, const DriftSpec& drift, const CostSpec& spec,
                            const SpaceTimeGrid& grid);

// Analytic route for linear drifts b = A x + c and Gaussian initial law.
DensityEvolution evolve_gaussian(const DriftSpec& linear_drift, const Vec& mean0, const Vec& cov0,
                                 const CostSpec& spec, int n_t);

struct CurrentVelocity {
    ScalarField j;
    ScalarField v;
};

// d=1 slice: j = b rho - (eps/2) rho',  v = b - (eps/2) (log rho)'
CurrentVelocity current_and_velocity(const ScalarField& rho_slice, const DriftSpec& drift, const CostSpec& spec,
                                     double t = 0.0);
// pointwise velocity for any density route
void velocity_at(const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec, double t, const double* x,
                 double* out);

enum class SysConvention {
    reflected,     // s_sys = -log rho(T - t, X_t)
    conventional,  // s_sys = -log rho(t, X_t), for comparison only
};

struct EntropyLedger {
    Vec ds_sys, ds_m, ds_tot;  // per-path totals over [0,T]
    std::vector<int> path_ids;
    MeanSE sys, medium, total;
    int excluded = 0;
    int n_input = 0;
    SysConvention convention = SysConvention::reflected;
    double max_identity_error = 0.0;  // |tot - sys - m|
};

EntropyLedger entropy_ledger(const PathEnsemble& ensemble, const DensityEvolution& rho, const DriftSpec& drift,
                             const CostSpec& spec, SysConvention conv = SysConvention::reflected);

// (2/eps) int v(T-t) o dX - int div(v rho)/rho (T-t) dt along one path
double log_rn_traj(const Path& path, const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec);

struct SecondLawReport {
    double mean = 0.0, se = 0.0;
    long n = 0;
    bool pass = false;
};

struct IftReport {
    double mean_exp = 0.0, se = 0.0;
    long n = 0;
    bool pass = false;
};

SecondLawReport second_law_check(const EntropyLedger& ledger);
IftReport ift_check(const EntropyLedger& ledger);

// (2/eps) int_0^T int |v(T-t,x)|^2 rho(t,x) dx dt
double epr_quadrature(const DensityEvolution& rho, const DriftSpec& drift, const CostSpec& spec);

// s_tot(t_k) = (S(t_k, X) - S_rev(T - t_k, X)) / eps along the path
Vec total_entropy_from_hj(const Path& path, const ScalarField& S, const ScalarField& S_rev, const CostSpec& spec);

}  // namespace stl
