#pragma once

#include <vector>

namespace stl::detail {

// Tridiagonal system with a cached LU factorisation (Thomas).
struct Tridiag {
    std::vector<double> lo, di, up;  // lo[0] and up[n-1] unused
    std::vector<double> c_, m_;      // factor
    void factor() {
        size_t n = di.size();
        c_.assign(n, 0.0);
        m_.assign(n, 0.0);
        double b = di[0];
        m_[0] = 1.0 / b;
        for (size_t i = 1; i < n; ++i) {
            c_[i] = up[i - 1] * m_[i - 1];
            b = di[i] - lo[i] * c_[i];
            m_[i] = 1.0 / b;
        }
    }
    void solve(double* x, int stride = 1) const {
        size_t n = di.size();
        x[0] *= m_[0];
        for (size_t i = 1; i < n; ++i) x[i * stride] = (x[i * stride] - lo[i] * x[(i - 1) * stride]) * m_[i];
        for (size_t i = n - 1; i-- > 0;) x[i * stride] -= c_[i + 1] * x[(i + 1) * stride];
    }
    void apply(const double* in, double* out) const {
        size_t n = di.size();
        for (size_t i = 0; i < n; ++i) {
            double s = di[i] * in[i];
            if (i > 0) s += lo[i] * in[i - 1];
            if (i + 1 < n) s += up[i] * in[i + 1];
            out[i] = s;
        }
    }
};

}  // namespace stl::detail
