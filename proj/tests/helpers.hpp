#pragma once

#include <cmath>
#include <optional>

#include "stl/problem.hpp"

namespace testing {

inline stl::CostSpec spec_with(double eps, double T = 1.0) {
    stl::CostSpec s;
    s.epsilon = eps;
    s.horizon = T;
    return s;
}

// g = lam x^2/2 with the running cost that keeps S = -g for all t
inline stl::CostSpec stationary_pair(double lam, double eps, std::optional<double> kappa = std::nullopt) {
    stl::CostSpec s = spec_with(eps);
    s.terminal = stl::Potential::quadratic1(lam);
    s.running = stl::Potential::quadratic1(lam * lam, 0.0, -0.5 * eps * lam);
    if (kappa) s.initial = stl::Potential::quadratic1(*kappa);
    return s;
}

inline stl::CostSpec harmonic(double eps = 1.0) {
    stl::CostSpec s = spec_with(eps);
    s.running = stl::Potential::quadratic1(1.0);
    return s;
}

inline double normal_pdf(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

}  // namespace testing
