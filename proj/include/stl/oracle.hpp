#pragma once

#include <vector>

// Closed-form and brute-force references. Only elementary arithmetic and
// Eigen are shared with the solvers.

namespace stl::oracle {

using Vec = std::vector<double>;

// S(t,x) = -a(t) x^2/2 + m(t) x + c(t) for g = lambda x^2/2 + g1 x + g0 and
// V = v2 x^2 + v1 x + v0. Matching powers of x in the second-order HJ equation:
//   a' = a^2 - 2 v2,   m' = a m + v1,   c' = v0 - m^2/2 + (eps/2) a
// integrated backward from a(T)=lambda, m(T)=-g1, c(T)=-g0.
struct RiccatiSolution {
    Vec t, a, m, c;
    double epsilon = 0.0;
    bool reversed = false;

    double S(double time, double x) const;
    double dSdx(double time, double x) const;
    void coefficients(double time, double& a_out, double& m_out, double& c_out) const;

private:
    friend RiccatiSolution riccati_solve(double, double, double, double, double, double, double, double, int, bool);
    Vec da, dm, dc;
};

struct QuadraticV {
    double v2 = 0.0, v1 = 0.0, v0 = 0.0;
};

RiccatiSolution riccati_hj(double lambda_terminal, const QuadraticV& V, double epsilon, double T, int n_steps,
                           double g1 = 0.0, double g0 = 0.0);

// Reversed equation  -S_t + |S_x|^2/2 + (eps/2) S_xx = V  forward from S(0) = -f,
// f = kappa x^2/2 + f1 x + f0:
//   a' = 2 v2 - a^2,   m' = -a m - v1,   c' = m^2/2 - (eps/2) a - v0
RiccatiSolution riccati_hj_reversed(double kappa_initial, const QuadraticV& V, double epsilon, double T, int n_steps,
                                    double f1 = 0.0, double f0 = 0.0);

RiccatiSolution riccati_solve(double a_end, double m_end, double c_end, double v2, double v1, double v0,
                              double epsilon, double T, int n_steps, bool reversed);

struct LyapunovResult {
    Vec t;
    std::vector<Vec> mean;  // per time, d entries
    std::vector<Vec> cov;   // per time, d*d row-major
    Vec stationary_cov;     // empty unless requested
    double epr_rate = 0.0;  // at stationarity
};

// m' = A m, Sigma' = A Sigma + Sigma A^T + eps I by RK4.
LyapunovResult lyapunov_gaussian(const Vec& A, int d, double epsilon, double T, const Vec& m0, const Vec& cov0,
                                 int n_steps, bool stationary);

double gaussian_mgf(const Vec& a, const Vec& mu, const Vec& cov);
double gaussian_quadratic_form(const Vec& M, const Vec& mu, const Vec& cov);

struct IpfpPotentials {
    Vec f, g;
    int iterations = 0;
    double marginal_error = 0.0;
};

// Plain alternating scaling on K (n x n row-major) with quadrature weights w.
IpfpPotentials brute_force_ipfp(const Vec& K, const Vec& w, const Vec& rho0, const Vec& rhoT, double epsilon,
                                double tol, int max_iter = 100000);

// Harmonic case V = x^2/2, g = 0
double harmonic_path(double x0, double T, double t);
double harmonic_velocity(double x0, double T, double t);
double harmonic_inf_om(double x0, double T);
double harmonic_S(double epsilon, double T, double t, double x);

}  // namespace stl::oracle
