#pragma once

#include <vector>

#include "stl/field.hpp"

namespace stl {

// Time-dependent probability density rho(t, x) on [0, T], either tabulated on
// a d=1 space-time grid or Gaussian with given mean/covariance paths.
class DensityEvolution {
public:
    enum class Source { fpe_grid, gaussian_analytic };

    static DensityEvolution from_grid(const ScalarField& rho);
    // means/covs sampled at uniform times 0..T; A, c, eps give the ODE derivatives
    // used for Hermite interpolation (m' = A m + c, Sigma' = A Sigma + Sigma A^T + eps I).
    static DensityEvolution gaussian(int dim, double T, std::vector<Vec> means, std::vector<Vec> covs, const Vec& A,
                                     const Vec& c, double eps);

    Source source() const { return source_; }
    int dim() const { return dim_; }
    double horizon() const { return T_; }
    int n_t() const { return n_t_; }
    double time(int k) const { return k == n_t_ - 1 ? T_ : k * T_ / (n_t_ - 1); }

    double log_density(double t, const double* x) const;
    void grad_log(double t, const double* x, double* out) const;
    double lap_log(double t, const double* x) const;
    bool in_domain(const double* x) const;

    // draw from rho(t_k) given uniforms (grid, 1 value) or normals (gaussian, d values)
    void sample(int k, const double* randoms, double* out) const;

    // gaussian route
    void moments(double t, Vec& mean, Vec& cov) const;
    // grid route
    const ScalarField& rho() const { return rho_; }
    double max_mass_drift = 0.0;

private:
    Source source_ = Source::fpe_grid;
    int dim_ = 1;
    double T_ = 0.0;
    int n_t_ = 0;
    ScalarField rho_, log_rho_, grad_log_, lap_log_;
    std::vector<Vec> means_, covs_, dmeans_, dcovs_;
};

}  // namespace stl
