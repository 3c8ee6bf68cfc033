#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stl/field.hpp"
#include "stl/problem.hpp"
#include "stl/sde.hpp"
#include "stl/stats.hpp"

namespace stl {

// K[i*n + j] ~ V-weighted transition density from x_i (time 0) to y_j (time T).
struct FkKernel {
    Axis axis;
    Vec weights;  // trapezoid quadrature weights, including dx
    Vec K;        // row-major n x n
    double min_raw = 0.0;  // most negative entry before flooring at 0

    int n() const { return axis.n; }
    double at(int i, int j) const { return K[static_cast<size_t>(i) * axis.n + j]; }
};

FkKernel build_fk_kernel(const CostSpec& spec, const SpaceTimeGrid& grid);

struct BridgeSolution {
    ScalarField f_star, g_star;
    std::shared_ptr<const FkKernel> kernel;
    ScalarField fitted_rho0, fitted_rhoT;
    int iterations = 0;
    double l1_0 = 0.0, l1_T = 0.0;
    std::vector<double> history;  // max(L1_0, L1_T) per iteration
    int floored_nodes = 0;        // target entries raised to the positivity floor
};

struct BridgeOptions {
    double tol = 1e-6;
    int max_iter = 500;
    double floor = 1e-12;
};

// targets are space-only densities on the grid axis
BridgeSolution solve_schrodinger_system(const ScalarField& rho0, const ScalarField& rhoT, const CostSpec& spec,
                                        const SpaceTimeGrid& grid, const BridgeOptions& opt = {});
BridgeSolution solve_schrodinger_system(const ScalarField& rho0, const ScalarField& rhoT, const CostSpec& spec,
                                        const SpaceTimeGrid& grid, std::shared_ptr<const FkKernel> kernel,
                                        const BridgeOptions& opt = {});

// S* = solve_hj with terminal cost g*
ScalarField optimal_drift(const BridgeSolution& bridge, const CostSpec& spec, const SpaceTimeGrid& grid);

// per-path cost  int (|b|^2/2 + V) dt + g(X_T)  (trapezoid in time)
Vec control_costs(const DriftSpec& drift, const CostSpec& spec, const InitialCondition& init, const TimeGrid& tg,
                  int n_paths, unsigned long long seed);
MCEstimate control_value(const DriftSpec& drift, const CostSpec& spec, const InitialCondition& init,
                         const TimeGrid& tg, int n_paths, unsigned long long seed);

}  // namespace stl
