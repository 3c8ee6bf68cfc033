#include "stl/density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "stl/stats.hpp"

namespace stl {

namespace {

constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)

// cubic Hermite on [0,1] for value/derivative pairs
inline double hermite(double y0, double y1, double d0, double d1, double h, double s) {
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

}  // namespace

DensityEvolution DensityEvolution::from_grid(const ScalarField& rho) {
    if (rho.dim() != 1 || !rho.has_time) fail(ErrorKind::Domain, "grid density must be a d=1 space-time field");
    DensityEvolution d;
    d.source_ = Source::fpe_grid;
    d.dim_ = 1;
    d.T_ = rho.T;
    d.n_t_ = rho.n_t;
    d.rho_ = rho;
    d.rho_.label = FieldLabel::rho;
    const int n = rho.nx();
    const double dx = rho.axes[0].dx();
    d.log_rho_ = rho;
    d.grad_log_ = rho;
    d.lap_log_ = rho;
    for (int k = 0; k < rho.n_t; ++k) {
        double* lr = d.log_rho_.slice_ptr(k);
        const double* r = rho.slice_ptr(k);
        for (int i = 0; i < n; ++i) lr[i] = r[i] > 1e-300 ? std::log(r[i]) : kLogFloor;
        Vec g = gradient_1d(lr, n, dx);
        Vec l = laplacian_1d(lr, n, dx);
        std::copy(g.begin(), g.end(), d.grad_log_.slice_ptr(k));
        std::copy(l.begin(), l.end(), d.lap_log_.slice_ptr(k));
    }
    return d;
}

DensityEvolution DensityEvolution::gaussian(int dim, double T, std::vector<Vec> means, std::vector<Vec> covs,
                                            const Vec& A, const Vec& c, double eps) {
    if (means.size() != covs.size() || means.size() < 2) fail(ErrorKind::Domain, "gaussian density needs >= 2 slices");
    DensityEvolution d;
    d.source_ = Source::gaussian_analytic;
    d.dim_ = dim;
    d.T_ = T;
    d.n_t_ = static_cast<int>(means.size());
    using Mat = Eigen::MatrixXd;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Am(A.data(), dim, dim);
    for (size_t k = 0; k < means.size(); ++k) {
        Eigen::Map<const Eigen::VectorXd> m(means[k].data(), dim);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(covs[k].data(), dim,
                                                                                                   dim);
        Eigen::VectorXd dm = Am * m;
        if (!c.empty()) dm += Eigen::Map<const Eigen::VectorXd>(c.data(), dim);
        Mat dS = Am * S + S * Am.transpose() + eps * Mat::Identity(dim, dim);
        Vec dmv(dm.data(), dm.data() + dim);
        Vec dSv(dim * dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) dSv[i * dim + j] = dS(i, j);
        d.dmeans_.push_back(dmv);
        d.dcovs_.push_back(dSv);
    }
    d.means_ = std::move(means);
    d.covs_ = std::move(covs);
    return d;
}

void DensityEvolution::moments(double t, Vec& mean, Vec& cov) const {
    if (source_ != Source::gaussian_analytic) fail(ErrorKind::Domain, "moments are available for gaussian densities only");
    t = std::clamp(t, 0.0, T_);
    const double h = T_ / (n_t_ - 1);
    int k = std::min(static_cast<int>(t / h), n_t_ - 2);
    double s = (t - k * h) / h;
    mean.resize(dim_);
    cov.resize(static_cast<size_t>(dim_) * dim_);
    for (int i = 0; i < dim_; ++i)
        mean[i] = hermite(means_[k][i], means_[k + 1][i], dmeans_[k][i], dmeans_[k + 1][i], h, s);
    for (int i = 0; i < dim_ * dim_; ++i)
        cov[i] = hermite(covs_[k][i], covs_[k + 1][i], dcovs_[k][i], dcovs_[k + 1][i], h, s);
}

namespace {

// Precision-weighted residual P(x - m), log density and trace(P) for small d.
struct GaussEval {
    double logp;
    Eigen::VectorXd Pr;
    double trP;
};

GaussEval gauss_eval(const Vec& mean, const Vec& cov, int d, const double* x) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(cov.data(), d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Stability, "covariance lost positive definiteness");
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r[i] = x[i] - mean[i];
    Eigen::VectorXd Pr = llt.solve(r);
    double logdet = 0.0;
    const Eigen::MatrixXd L = llt.matrixL();
    for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(L(i, i));
    double trP = llt.solve(Eigen::MatrixXd::Identity(d, d)).trace();
    double logp = -0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet + r.dot(Pr));
    return {logp, Pr, trP};
}

}  // namespace

double DensityEvolution::log_density(double t, const double* x) const {
    if (source_ == Source::gaussian_analytic) {
        Vec m, S;
        moments(t, m, S);
        return gauss_eval(m, S, dim_, x).logp;
    }
    return log_rho_.interp(std::clamp(t, 0.0, T_), x[0]);
}

void DensityEvolution::grad_log(double t, const double* x, double* out) const {
    if (source_ == Source::gaussian_analytic) {
        Vec m, S;
        moments(t, m, S);
        GaussEval g = gauss_eval(m, S, dim_, x);
        for (int i = 0; i < dim_; ++i) out[i] = -g.Pr[i];
        return;
    }
    out[0] = grad_log_.interp(std::clamp(t, 0.0, T_), x[0]);
}

double DensityEvolution::lap_log(double t, const double* x) const {
    if (source_ == Source::gaussian_analytic) {
        Vec m, S;
        moments(t, m, S);
        return -gauss_eval(m, S, dim_, x).trP;
    }
    return lap_log_.interp(std::clamp(t, 0.0, T_), x[0]);
}

bool DensityEvolution::in_domain(const double* x) const {
    if (source_ == Source::gaussian_analytic) return true;
    return rho_.covers(x[0]);
}

void DensityEvolution::sample(int k, const double* randoms, double* out) const {
    if (k < 0 || k >= n_t_) fail(ErrorKind::Domain, "sample slice out of range");
    if (source_ == Source::gaussian_analytic) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(covs_[k].data(), dim_,
                                                                                                   dim_);
        Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(S).matrixL();
        Eigen::Map<const Eigen::VectorXd> z(randoms, dim_);
        Eigen::VectorXd y = L * z;
        for (int i = 0; i < dim_; ++i) out[i] = means_[k][i] + y[i];
        return;
    }
    GridCdf cdf(rho_.axes[0].min, rho_.axes[0].dx(), rho_.slice(k));
    out[0] = cdf.inverse(randoms[0]);
}

}  // namespace stl
