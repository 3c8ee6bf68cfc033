#pragma once

#include <functional>
#include <optional>
#include <string>

#include "stl/field.hpp"
#include "stl/problem.hpp"
#include "stl/sde.hpp"
#include "stl/stats.hpp"

namespace stl {

double phi_functional(const Path& path, const CostSpec& spec);
// time-reflected running cost plus the initial cost f at the path's end
double psi_functional(const Path& path, const CostSpec& spec);

struct ZMethod {
    enum class Kind { grid, mc };
    Kind kind = Kind::grid;
    SpaceTimeGrid grid;
    long n_samples = 20000;
    unsigned long long seed = 1;
    int substeps = 200;

    static ZMethod on_grid(const SpaceTimeGrid& g) { return {Kind::grid, g, 0, 0, 0}; }
    static ZMethod monte_carlo(long n, unsigned long long seed, int substeps = 200) {
        return {Kind::mc, {}, n, seed, substeps};
    }
};

// log Z_Phi(x) = log phi(0, x)
double normalizing_constant(const Vec& x, const CostSpec& spec, const ZMethod& method);
// log Z_Psi(x) = log psi(T, x)
double normalizing_constant_reversed(const Vec& x, const CostSpec& spec, const ZMethod& method);

double log_rn_nu_vs_mu(const Path& path, const CostSpec& spec, double logZ);
double log_rn_forward_vs_reversed(const Path& path, const CostSpec& spec, double logZ_phi, double logZ_psi);

// phi(t) psi(t) normalised to unit mass on the grid
ScalarField born_marginal(double t, const CostSpec& spec, const SpaceTimeGrid& grid);

struct KlInputs {
    const PathEnsemble* ensemble = nullptr;
    const DriftSpec* trial_drift = nullptr;
    // density mode: log density of the trial initial law; empty means point mode
    std::function<double(double)> trial_init_logdensity;
    // point mode: log Z at the common start point
    double logZ = 0.0;
    // density mode: log phi(0, .) on a grid, used for the initial normaliser
    std::optional<ScalarField> logZ_field;
    // target drift for the direct-Girsanov cross-check, when known
    const DriftSpec* target_drift = nullptr;
};

struct KlReport {
    MCEstimate estimate;
    std::optional<MCEstimate> cross_check;
    std::string method;  // "point" or "density"
};

KlReport kl_divergence(const KlInputs& in, const CostSpec& spec);

}  // namespace stl
