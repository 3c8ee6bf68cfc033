#include "stl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stl/error.hpp"

namespace stl {

MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE r;
    r.n = static_cast<long>(xs.size());
    if (xs.empty()) return r;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    bool constant = std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
    if (constant) {
        r.mean = xs.front();
        return r;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    r.mean = m;
    r.se = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1) / xs.size()) : 0.0;
    return r;
}

MeanSE paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail(ErrorKind::Domain, "paired samples must have equal length");
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
    return mean_se(d);
}

double log_sum_exp(const std::vector<double>& xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b, const std::vector<double>& b_weights) {
    if (a.empty() || b.empty()) fail(ErrorKind::Domain, "KS needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::vector<size_t> order(b.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return b[i] < b[j]; });
    std::vector<double> w(b.size(), 1.0);
    if (!b_weights.empty()) {
        if (b_weights.size() != b.size()) fail(ErrorKind::Domain, "weights length mismatch");
        w = b_weights;
    }
    double wsum = 0.0;
    for (double x : w) wsum += x;
    if (!(wsum > 0.0)) fail(ErrorKind::Domain, "weights sum to zero");

    size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, d = 0.0;
    const double na = static_cast<double>(a.size());
    while (i < a.size() || j < b.size()) {
        double xa = i < a.size() ? a[i] : std::numeric_limits<double>::infinity();
        double xb = j < b.size() ? b[order[j]] : std::numeric_limits<double>::infinity();
        double x = std::min(xa, xb);
        while (i < a.size() && a[i] == x) {
            ++i;
            fa = i / na;
        }
        while (j < b.size() && b[order[j]] == x) {
            fb += w[order[j]] / wsum;
            ++j;
        }
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_against_cdf(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) fail(ErrorKind::Domain, "KS needs a nonempty sample");
    std::sort(a.begin(), a.end());
    double n = static_cast<double>(a.size()), d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double F = cdf(a[i]);
        d = std::max({d, std::abs((i + 1) / n - F), std::abs(F - i / n)});
    }
    return d;
}

GridCdf::GridCdf(double x_min, double dx, const std::vector<double>& density)
    : x_min_(x_min), dx_(dx), cum_(density.size(), 0.0), dens_(density) {
    for (size_t i = 1; i < density.size(); ++i) cum_[i] = cum_[i - 1] + 0.5 * dx * (density[i - 1] + density[i]);
    double total = cum_.back();
    if (!(total > 0.0)) fail(ErrorKind::Domain, "density has no mass");
    for (auto& c : cum_) c /= total;
    for (auto& v : dens_) v /= total;
}

double GridCdf::operator()(double x) const {
    double s = (x - x_min_) / dx_;
    if (s <= 0) return 0.0;
    size_t i = static_cast<size_t>(s);
    if (i >= cum_.size() - 1) return 1.0;
    double w = s - i;
    // exact integral of the linear interpolant over the partial cell
    double f0 = dens_[i], f1 = dens_[i + 1];
    return cum_[i] + dx_ * (f0 * w + 0.5 * (f1 - f0) * w * w);
}

double GridCdf::inverse(double u) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.begin()) return x_min_;
    if (it == cum_.end()) return x_min_ + dx_ * (cum_.size() - 1);
    size_t i = static_cast<size_t>(it - cum_.begin()) - 1;
    double f0 = dens_[i], f1 = dens_[i + 1];
    double target = (u - cum_[i]) / dx_;
    // solve f0 w + (f1-f0) w^2 / 2 = target for w in [0,1]
    double a = 0.5 * (f1 - f0), w;
    if (std::abs(a) < 1e-14 * std::max(1.0, f0)) {
        w = f0 > 0 ? target / f0 : 0.5;
    } else {
        double disc = std::max(0.0, f0 * f0 + 4.0 * a * target);
        w = (-f0 + std::sqrt(disc)) / (2.0 * a);
        if (!(w >= 0.0 && w <= 1.0)) w = f0 + f1 > 0 ? 2.0 * target / (f0 + f1) : 0.5;
    }
    return x_min_ + dx_ * (i + std::clamp(w, 0.0, 1.0));
}

double normal_cdf(double x, double mean, double var) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

}  // namespace stl
