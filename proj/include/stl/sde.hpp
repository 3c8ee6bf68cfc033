#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "stl/density.hpp"
#include "stl/field.hpp"
#include "stl/problem.hpp"

namespace stl {

// Markovian drift b(t, x).
struct DriftSpec {
    enum class Kind { zero, gradient_of, registry, linear, tabulated, custom };

    Kind kind = Kind::zero;
    int dim = 1;
    // evaluate at T - t instead of t
    bool time_reversed = false;
    double horizon = 0.0;

    std::shared_ptr<const ScalarField> grad;      // gradient_of: dS/dx per slice
    std::shared_ptr<const ScalarField> grad2;     // gradient_of: d2S/dx2 per slice
    Potential potential;                           // registry
    double sign = 1.0;                             // registry: b = sign * grad P
    Vec A;                                         // linear, row-major d x d
    Vec offset;                                    // linear
    std::vector<std::shared_ptr<const ScalarField>> components;  // tabulated
    std::function<void(double, const double*, double*)> fn;      // custom
    std::function<double(double, const double*)> div_fn;         // custom, optional
    std::optional<Window> box;                     // optional domain for analytic drifts

    static DriftSpec zero(int dim = 1);
    static DriftSpec gradient_of(const ScalarField& S);
    static DriftSpec registry(const Potential& p, double sign);
    static DriftSpec linear(Vec A, int dim, Vec offset = {});
    static DriftSpec tabulated(const std::vector<ScalarField>& components);
    static DriftSpec custom(int dim, std::function<void(double, const double*, double*)> fn,
                            std::function<double(double, const double*)> div = {});

    DriftSpec reversed(double T) const;

    void eval(double t, const double* x, double* out) const;
    double divergence(double t, const double* x) const;
    bool in_domain(const double* x) const;
    std::string kind_name() const;
};

struct InitialCondition {
    enum class Kind { point, density, gaussian, evolution };
    Kind kind = Kind::point;
    Vec x;                  // point
    ScalarField density;    // d=1 density on a grid
    Vec mean, cov;          // gaussian
    const DensityEvolution* evolution = nullptr;  // sample rho at slice `slice`
    int slice = 0;

    static InitialCondition point(Vec x);
    static InitialCondition from_density(const ScalarField& rho);
    static InitialCondition gaussian(Vec mean, Vec cov);
    static InitialCondition from_evolution(const DensityEvolution& rho, int slice);
    int dim() const;
};

struct TimeGrid {
    double T = 1.0;
    int n_steps = 1000;
    double dt() const { return T / n_steps; }
    double t(int k) const { return k == n_steps ? T : k * dt(); }
};

struct SimOptions {
    int record_stride = 1;               // store every k-th step (the last is always stored)
    double max_escape_fraction = 0.01;
    long stream_offset = 0;  // path p draws from stream p + offset (for batching)
};

// Euler-Maruyama with per-(path, step) counter-based normals.
PathEnsemble simulate(const DriftSpec& drift, const InitialCondition& init, const CostSpec& spec,
                      const TimeGrid& time_grid, int n_paths, unsigned long long master_seed,
                      const SimOptions& opt = {});

// d<-X = (-b(T-t) + eps grad log rho(T-t)) dt + sqrt(eps) dB, X(0) ~ rho(T).
PathEnsemble simulate_time_reversed(const DriftSpec& forward_drift, const DensityEvolution& rho, const CostSpec& spec,
                                    const TimeGrid& time_grid, int n_paths, unsigned long long seed,
                                    const SimOptions& opt = {});

// Ito left-point Girsanov exponent of drift b against driftless sqrt(eps) B.
double girsanov_log_weight(const Path& path, const DriftSpec& drift, const CostSpec& spec);

// eps logZ + Phi(X) + sum gradS . dX - 1/2 sum |gradS|^2 dt along X = x + sqrt(eps) B.
double pathwise_identity_residual(const Path& path, const DriftSpec& grad_S, const CostSpec& spec, double logZ_at_x);
double pathwise_identity_residual(const Path& path, const ScalarField& S, const CostSpec& spec, double logZ_at_x);

}  // namespace stl
