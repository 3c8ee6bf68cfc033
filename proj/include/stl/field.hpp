#pragma once

#include <string>
#include <vector>

#include "stl/problem.hpp"

namespace stl {

enum class FieldLabel { S, S_rev, phi, psi, rho, V_snapshot, S0, log_phi, log_psi, other };

const char* to_string(FieldLabel l);
FieldLabel field_label_from_string(const std::string& s);

// Scalar values on a spatial tensor grid, optionally stacked over a uniform
// time axis t_k = k*T/(n_t-1). Layout: time slowest, last spatial axis fastest.
struct ScalarField {
    FieldLabel label = FieldLabel::other;
    std::vector<Axis> axes;
    bool has_time = false;
    int n_t = 1;
    double T = 0.0;
    Vec values;

    static ScalarField space_time(FieldLabel label, const Axis& x, int n_t, double T);
    static ScalarField space(FieldLabel label, const std::vector<Axis>& axes);

    int dim() const { return static_cast<int>(axes.size()); }
    int nx() const { return axes.at(0).n; }
    size_t slice_size() const;
    double t(int k) const { return k == n_t - 1 ? T : (n_t > 1 ? k * T / (n_t - 1) : 0.0); }
    double dt() const { return T / (n_t - 1); }

    double& at(int k, int i) { return values[static_cast<size_t>(k) * nx() + i]; }
    double at(int k, int i) const { return values[static_cast<size_t>(k) * nx() + i]; }
    double* slice_ptr(int k) { return values.data() + static_cast<size_t>(k) * slice_size(); }
    const double* slice_ptr(int k) const { return values.data() + static_cast<size_t>(k) * slice_size(); }
    Vec slice(int k) const;
    ScalarField slice_field(int k) const;

    // d=1 linear interpolation in x (and t when present); throws outside the grid
    double interp(double t, double x) const;
    double interp_x(int k, double x) const;
    bool covers(double x) const { return axes[0].contains(x); }

    void check() const;
};

// d=1 central differences; second order one-sided at the ends
Vec gradient_1d(const double* v, int n, double dx);
Vec laplacian_1d(const double* v, int n, double dx);
double trapezoid(const double* v, int n, double dx);

void write_field_csv(const ScalarField& f, const std::string& path);
void write_field_binary(const ScalarField& f, const std::string& path);
ScalarField read_field_binary(const std::string& path);
// Reads CSV written by write_field_csv (d=1, space or space-time).
ScalarField read_field_csv(const std::string& path);
ScalarField read_field_file(const std::string& path);

void write_ensemble_csv(const PathEnsemble& e, const std::string& path);
void write_ensemble_binary(const PathEnsemble& e, const std::string& path);
PathEnsemble read_ensemble_binary(const std::string& path);

void write_path_csv(const Path& p, const std::string& path);

std::string format_double(double v);

}  // namespace stl
