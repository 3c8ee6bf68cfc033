#include "stl/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace stl {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kFieldMagic[8] = {'S', 'T', 'L', 'G', 'R', 'I', 'D', '\0'};
constexpr char kEnsembleMagic[8] = {'S', 'T', 'L', 'E', 'N', 'S', 'B', '\0'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) fail(ErrorKind::Io, "truncated file: " + path);
    return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) fail(ErrorKind::Io, "cannot open for writing: " + path);
    return os;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* to_string(FieldLabel l) {
    switch (l) {
    case FieldLabel::S: return "S";
    case FieldLabel::S_rev: return "S_rev";
    case FieldLabel::phi: return "phi";
    case FieldLabel::psi: return "psi";
    case FieldLabel::rho: return "rho";
    case FieldLabel::V_snapshot: return "V_snapshot";
    case FieldLabel::S0: return "S0";
    case FieldLabel::log_phi: return "log_phi";
    case FieldLabel::log_psi: return "log_psi";
    case FieldLabel::other: return "other";
    }
    return "other";
}

FieldLabel field_label_from_string(const std::string& s) {
    static const std::map<std::string, FieldLabel> m = {
        {"S", FieldLabel::S},         {"S_rev", FieldLabel::S_rev},     {"phi", FieldLabel::phi},
        {"psi", FieldLabel::psi},     {"rho", FieldLabel::rho},         {"V_snapshot", FieldLabel::V_snapshot},
        {"S0", FieldLabel::S0},       {"log_phi", FieldLabel::log_phi}, {"log_psi", FieldLabel::log_psi},
        {"other", FieldLabel::other}};
    auto it = m.find(s);
    return it == m.end() ? FieldLabel::other : it->second;
}

ScalarField ScalarField::space_time(FieldLabel label, const Axis& x, int n_t, double T) {
    ScalarField f;
    f.label = label;
    f.axes = {x};
    f.has_time = true;
    f.n_t = n_t;
    f.T = T;
    f.values.assign(static_cast<size_t>(n_t) * x.n, 0.0);
    return f;
}

ScalarField ScalarField::space(FieldLabel label, const std::vector<Axis>& axes) {
    ScalarField f;
    f.label = label;
    f.axes = axes;
    f.has_time = false;
    f.n_t = 1;
    f.values.assign(f.slice_size(), 0.0);
    return f;
}

size_t ScalarField::slice_size() const {
    size_t n = 1;
    for (const auto& a : axes) n *= static_cast<size_t>(a.n);
    return n;
}

Vec ScalarField::slice(int k) const {
    const double* p = slice_ptr(k);
    return Vec(p, p + slice_size());
}

ScalarField ScalarField::slice_field(int k) const {
    ScalarField f = space(label, axes);
    f.values = slice(k);
    return f;
}

double ScalarField::interp_x(int k, double x) const {
    const Axis& ax = axes[0];
    double tol = 1e-12 * (ax.max - ax.min);
    if (!(x >= ax.min - tol && x <= ax.max + tol)) fail(ErrorKind::Domain, "field queried outside its grid");
    double s = (x - ax.min) / ax.dx();
    int i = std::clamp(static_cast<int>(s), 0, ax.n - 2);
    double w = std::clamp(s - i, 0.0, 1.0);
    const double* v = slice_ptr(k);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

double ScalarField::interp(double t, double x) const {
    if (!has_time || n_t == 1) return interp_x(0, x);
    double s = std::clamp(t / dt(), 0.0, static_cast<double>(n_t - 1));
    int k = std::min(static_cast<int>(s), n_t - 2);
    double w = s - k;
    double a = interp_x(k, x);
    if (w == 0.0) return a;
    return (1.0 - w) * a + w * interp_x(k + 1, x);
}

void ScalarField::check() const {
    if (values.size() != slice_size() * static_cast<size_t>(has_time ? n_t : 1))
        fail(ErrorKind::Specification, "field shape does not match its grid");
    for (double v : values)
        if (!std::isfinite(v)) fail(ErrorKind::Stability, std::string("non-finite value in field ") + to_string(label));
    if (label == FieldLabel::phi || label == FieldLabel::psi)
        for (double v : values)
            if (!(v > 0.0)) fail(ErrorKind::Stability, std::string("non-positive value in field ") + to_string(label));
}

Vec gradient_1d(const double* v, int n, double dx) {
    Vec g(n);
    for (int i = 1; i < n - 1; ++i) g[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    g[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    g[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
    return g;
}

Vec laplacian_1d(const double* v, int n, double dx) {
    Vec l(n);
    double h2 = dx * dx;
    for (int i = 1; i < n - 1; ++i) l[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    l[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    l[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    return l;
}

double trapezoid(const double* v, int n, double dx) {
    double s = 0.5 * (v[0] + v[n - 1]);
    for (int i = 1; i < n - 1; ++i) s += v[i];
    return s * dx;
}

void write_field_csv(const ScalarField& f, const std::string& path) {
    auto os = open_out(path, false);
    if (f.dim() == 1) {
        os << (f.has_time ? "t,x,value\n" : "x,value\n");
        for (int k = 0; k < (f.has_time ? f.n_t : 1); ++k)
            for (int i = 0; i < f.nx(); ++i) {
                if (f.has_time) os << format_double(f.t(k)) << ',';
                os << format_double(f.axes[0].x(i)) << ',' << format_double(f.at(k, i)) << '\n';
            }
    } else {
        if (f.has_time) os << "t,";
        for (int d = 0; d < f.dim(); ++d) os << "x_" << d + 1 << ',';
        os << "value\n";
        size_t per = f.slice_size();
        std::vector<int> idx(f.dim());
        for (int k = 0; k < (f.has_time ? f.n_t : 1); ++k)
            for (size_t flat = 0; flat < per; ++flat) {
                size_t rem = flat;
                for (int d = f.dim() - 1; d >= 0; --d) {
                    idx[d] = static_cast<int>(rem % f.axes[d].n);
                    rem /= f.axes[d].n;
                }
                if (f.has_time) os << format_double(f.t(k)) << ',';
                for (int d = 0; d < f.dim(); ++d) os << format_double(f.axes[d].x(idx[d])) << ',';
                os << format_double(f.values[k * per + flat]) << '\n';
            }
    }
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

void write_field_binary(const ScalarField& f, const std::string& path) {
    auto os = open_out(path, true);
    os.write(kFieldMagic, 8);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, static_cast<uint32_t>(f.label));
    put<uint32_t>(os, static_cast<uint32_t>(f.dim() + (f.has_time ? 1 : 0)));
    put<uint32_t>(os, f.has_time ? 1u : 0u);
    if (f.has_time) {
        put<uint64_t>(os, static_cast<uint64_t>(f.n_t));
        put<double>(os, 0.0);
        put<double>(os, f.T);
    }
    for (const auto& a : f.axes) {
        put<uint64_t>(os, static_cast<uint64_t>(a.n));
        put<double>(os, a.min);
        put<double>(os, a.max);
    }
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

ScalarField read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorKind::Io, "cannot open field file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kFieldMagic, 8) != 0) fail(ErrorKind::Io, "bad field magic in " + path);
    if (get<uint32_t>(is, path) != kVersion) fail(ErrorKind::Io, "unsupported field version in " + path);
    ScalarField f;
    uint32_t label = get<uint32_t>(is, path);
    if (label > static_cast<uint32_t>(FieldLabel::other)) fail(ErrorKind::Io, "bad field label in " + path);
    f.label = static_cast<FieldLabel>(label);
    uint32_t ndims = get<uint32_t>(is, path);
    f.has_time = get<uint32_t>(is, path) != 0;
    if (ndims < (f.has_time ? 2u : 1u) || ndims > 8) fail(ErrorKind::Io, "bad dimension count in " + path);
    if (f.has_time) {
        f.n_t = static_cast<int>(get<uint64_t>(is, path));
        double t0 = get<double>(is, path);
        f.T = get<double>(is, path);
        if (t0 != 0.0 || f.n_t < 2 || !(f.T > 0.0)) fail(ErrorKind::Io, "bad time axis in " + path);
    }
    for (uint32_t d = 0; d < ndims - (f.has_time ? 1 : 0); ++d) {
        Axis a;
        uint64_t n = get<uint64_t>(is, path);
        a.min = get<double>(is, path);
        a.max = get<double>(is, path);
        if (n < 2 || n > (1u << 26) || !(a.max > a.min)) fail(ErrorKind::Io, "bad axis in " + path);
        a.n = static_cast<int>(n);
        f.axes.push_back(a);
    }
    size_t total = f.slice_size() * (f.has_time ? f.n_t : 1);
    f.values.resize(total);
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(total * sizeof(double)));
    if (!is) fail(ErrorKind::Io, "truncated payload in " + path);
    is.peek();
    if (!is.eof()) fail(ErrorKind::Io, "trailing bytes in " + path);
    for (double v : f.values)
        if (!std::isfinite(v)) fail(ErrorKind::Io, "non-finite payload in " + path);
    return f;
}

ScalarField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot open field file: " + path);
    std::string header;
    std::getline(is, header);
    bool has_time = header.rfind("t,x,value", 0) == 0;
    if (!has_time && header.rfind("x,value", 0) != 0) fail(ErrorKind::Io, "unrecognised CSV header in " + path);
    std::vector<double> ts, xs, vs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) fail(ErrorKind::Io, "malformed number in " + path);
            row.push_back(v);
        }
        if (row.size() != (has_time ? 3u : 2u)) fail(ErrorKind::Io, "malformed row in " + path);
        if (has_time) ts.push_back(row[0]);
        xs.push_back(row[has_time ? 1 : 0]);
        vs.push_back(row.back());
    }
    if (vs.size() < 2) fail(ErrorKind::Io, "too few rows in " + path);
    int nx = 1;
    while (nx < static_cast<int>(xs.size()) && xs[nx] > xs[nx - 1]) ++nx;
    if (vs.size() % nx != 0) fail(ErrorKind::Io, "ragged grid in " + path);
    ScalarField f;
    f.axes = {Axis{xs.front(), xs[nx - 1], nx}};
    f.has_time = has_time;
    f.n_t = has_time ? static_cast<int>(vs.size() / nx) : 1;
    f.T = has_time ? ts.back() : 0.0;
    f.values = vs;
    return f;
}

ScalarField read_field_file(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot != std::string::npos && path.substr(dot) == ".csv") return read_field_csv(path);
    return read_field_binary(path);
}

void write_ensemble_csv(const PathEnsemble& e, const std::string& path) {
    auto os = open_out(path, false);
    os << "path_id,t";
    for (int d = 0; d < e.dim; ++d) os << ",x_" << d + 1;
    os << '\n';
    for (int p = 0; p < e.n_paths; ++p)
        for (int k = 0; k < e.n_times(); ++k) {
            os << e.path_ids[p] << ',' << format_double(e.times[k]);
            for (int d = 0; d < e.dim; ++d) os << ',' << format_double(e.at(p, k)[d]);
            os << '\n';
        }
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

void write_ensemble_binary(const PathEnsemble& e, const std::string& path) {
    auto os = open_out(path, true);
    os.write(kEnsembleMagic, 8);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, static_cast<uint32_t>(e.dim));
    put<uint64_t>(os, static_cast<uint64_t>(e.n_paths));
    put<uint64_t>(os, static_cast<uint64_t>(e.n_times()));
    put<uint64_t>(os, static_cast<uint64_t>(e.master_seed));
    os.write(reinterpret_cast<const char*>(e.times.data()), static_cast<std::streamsize>(e.times.size() * sizeof(double)));
    for (int id : e.path_ids) put<int64_t>(os, id);
    os.write(reinterpret_cast<const char*>(e.states.data()), static_cast<std::streamsize>(e.states.size() * sizeof(double)));
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

PathEnsemble read_ensemble_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorKind::Io, "cannot open ensemble file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kEnsembleMagic, 8) != 0) fail(ErrorKind::Io, "bad ensemble magic in " + path);
    if (get<uint32_t>(is, path) != kVersion) fail(ErrorKind::Io, "unsupported ensemble version in " + path);
    PathEnsemble e;
    e.dim = static_cast<int>(get<uint32_t>(is, path));
    e.n_paths = static_cast<int>(get<uint64_t>(is, path));
    uint64_t nt = get<uint64_t>(is, path);
    e.master_seed = get<uint64_t>(is, path);
    if (e.dim < 1 || nt < 1 || nt > (1u << 26)) fail(ErrorKind::Io, "bad ensemble header in " + path);
    e.times.resize(nt);
    is.read(reinterpret_cast<char*>(e.times.data()), static_cast<std::streamsize>(nt * sizeof(double)));
    e.path_ids.resize(e.n_paths);
    for (auto& id : e.path_ids) id = static_cast<int>(get<int64_t>(is, path));
    e.states.resize(static_cast<size_t>(e.n_paths) * nt * e.dim);
    is.read(reinterpret_cast<char*>(e.states.data()), static_cast<std::streamsize>(e.states.size() * sizeof(double)));
    if (!is) fail(ErrorKind::Io, "truncated ensemble payload in " + path);
    return e;
}

void write_path_csv(const Path& p, const std::string& path) {
    auto os = open_out(path, false);
    os << "t";
    for (int d = 0; d < p.dim; ++d) os << ",x_" << d + 1;
    os << '\n';
    for (int k = 0; k < p.size(); ++k) {
        os << format_double(p.times[k]);
        for (int d = 0; d < p.dim; ++d) os << ',' << format_double(p.at(k)[d]);
        os << '\n';
    }
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

}  // namespace stl
