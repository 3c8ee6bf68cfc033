#pragma once

#include <functional>
#include <vector>

namespace stl {

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    unsigned long long seed = 0;
    // Set when the integrand overflowed double range; then mean/std_error may be
    // inf or 0 and only the log fields are meaningful.
    bool log_domain = false;
    double log_mean = 0.0;
    double log_std_error = 0.0;
};

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
};

MeanSE mean_se(const std::vector<double>& xs);
// Standard error of the mean of paired differences b - a.
MeanSE paired_difference(const std::vector<double>& a, const std::vector<double>& b);

double log_sum_exp(const std::vector<double>& xs);

// sup |F_a - F_b| with optional nonnegative weights on b (empty = uniform)
double ks_two_sample(std::vector<double> a, std::vector<double> b, const std::vector<double>& b_weights = {});
double ks_against_cdf(std::vector<double> a, const std::function<double(double)>& cdf);

// CDF of a density tabulated on a uniform grid (trapezoid, linear in between).
class GridCdf {
public:
    GridCdf(double x_min, double dx, const std::vector<double>& density);
    double operator()(double x) const;
    double inverse(double u) const;

private:
    double x_min_, dx_;
    std::vector<double> cum_;
    std::vector<double> dens_;
};

double normal_cdf(double x, double mean, double var);

}  // namespace stl
